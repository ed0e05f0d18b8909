use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::{CreationId, LabeledGraph, VertexId};
use crate::expr::{Expression, Op};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertError {
    #[error("certificate is not a bijection: {0}")]
    NonBijective(String),
    #[error("output atom at preorder position {0} has no recorded source")]
    MissingSource(u32),
    #[error("creation {creation} maps to no input vertex")]
    Dangling { creation: CreationId },
    #[error("output vertex {vertex} mixes creations of input vertices {a} and {b}")]
    Inconsistent { vertex: VertexId, a: VertexId, b: VertexId },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Vertex correspondence from an output graph to an input graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConversionCertificate {
    map: BTreeMap<VertexId, VertexId>,
}

impl ConversionCertificate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(g: &LabeledGraph) -> Self {
        ConversionCertificate {
            map: g.vertex_ids().map(|v| (v, v)).collect(),
        }
    }

    pub fn insert(&mut self, output: VertexId, input: VertexId) -> Option<VertexId> {
        self.map.insert(output, input)
    }

    pub fn get(&self, output: VertexId) -> Option<VertexId> {
        self.map.get(&output).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.map.iter().map(|(&a, &b)| (a, b))
    }

    /// `self` maps output to middle, `inner` maps middle to input.
    pub fn compose(&self, inner: &ConversionCertificate) -> Option<ConversionCertificate> {
        let mut map = BTreeMap::new();
        for (&out, mid) in &self.map {
            map.insert(out, inner.get(*mid)?);
        }
        Some(ConversionCertificate { map })
    }

    /// `output_vertex input_vertex` pairs, one per line, ascending output.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (o, i) in &self.map {
            let _ = writeln!(s, "{o} {i}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<ConversionCertificate, CertError> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: &str| CertError::Parse {
                line: n + 1,
                message: message.to_string(),
            };
            let mut it = line.split_ascii_whitespace().map(str::parse::<u32>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(o)), Some(Ok(i)), None) => {
                    if map.insert(VertexId(o), VertexId(i)).is_some() {
                        return Err(bad("output vertex listed twice"));
                    }
                }
                _ => return Err(bad("expected `output_vertex input_vertex`")),
            }
        }
        Ok(ConversionCertificate { map })
    }
}

/// Checks that `cert` is a bijection from the vertices of `output` onto the
/// vertices of `input` that preserves adjacency in both directions. Labels
/// are ignored.
pub fn check_correspondence(
    input: &LabeledGraph,
    output: &LabeledGraph,
    cert: &ConversionCertificate,
) -> Result<bool, CertError> {
    let mut image = BTreeSet::new();
    for v in output.vertex_ids() {
        let Some(w) = cert.get(v) else {
            return Err(CertError::NonBijective(format!("output vertex {v} is unmapped")));
        };
        if !input.contains(w) {
            return Err(CertError::NonBijective(format!(
                "output vertex {v} maps to missing input vertex {w}"
            )));
        }
        if !image.insert(w) {
            return Err(CertError::NonBijective(format!("input vertex {w} is hit twice")));
        }
    }
    if image.len() != input.vertex_count() {
        return Err(CertError::NonBijective(format!(
            "{} of {} input vertices are covered",
            image.len(),
            input.vertex_count()
        )));
    }
    if input.edge_count() != output.edge_count() {
        return Ok(false);
    }
    Ok(output
        .edges()
        .all(|(u, v)| input.has_edge(cert.get(u).unwrap(), cert.get(v).unwrap())))
}

/// Where the vertices of an output atom come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomSource {
    /// Output creation `k` of the atom corresponds to input creation
    /// `(atom, offset + k)`.
    Creation(CreationId),
    /// Every creation of the atom is this input vertex.
    Vertex(VertexId),
}

/// Builds the certificate for a conversion from recorded atom sources.
///
/// `sources` is keyed by postorder index of the atom in `output_expr`.
/// Every creation merged into one output vertex must lead to the same
/// input vertex.
pub fn derive_certificate(
    input: &LabeledGraph,
    output_expr: &Expression,
    output: &LabeledGraph,
    sources: &BTreeMap<usize, AtomSource>,
) -> Result<ConversionCertificate, CertError> {
    let preorder = output_expr.preorder_positions();
    let mut by_preorder: BTreeMap<u32, AtomSource> = BTreeMap::new();
    for (idx, op) in output_expr.ops().iter().enumerate() {
        if let Op::Verts { .. } = op {
            if let Some(s) = sources.get(&idx) {
                by_preorder.insert(preorder[idx] as u32, *s);
            }
        }
    }
    let mut cert = ConversionCertificate::new();
    for (v, info) in output.vertices() {
        let mut target: Option<VertexId> = None;
        for c in &info.provenance {
            let src = by_preorder.get(&c.atom).ok_or(CertError::MissingSource(c.atom))?;
            let w = match *src {
                AtomSource::Vertex(w) => w,
                AtomSource::Creation(base) => {
                    let ic = CreationId {
                        atom: base.atom,
                        offset: base.offset + c.offset,
                    };
                    input.owner_of(ic).ok_or(CertError::Dangling { creation: ic })?
                }
            };
            match target {
                None => target = Some(w),
                Some(t) if t != w => {
                    return Err(CertError::Inconsistent { vertex: v, a: t, b: w })
                }
                _ => {}
            }
        }
        cert.insert(v, target.expect("nonempty provenance"));
    }
    Ok(cert)
}
