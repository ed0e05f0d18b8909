//! Labeled graphs generated by expressions.

mod cert;
mod eval;
mod iso;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use crate::expr::LabelId;

pub use cert::{
    check_correspondence, derive_certificate, AtomSource, CertError, ConversionCertificate,
};
pub(crate) use eval::{Engine, Observer};
pub use eval::{evaluate, try_evaluate, EvalError};
pub use iso::{isomorphic_small, IsoError, DEFAULT_ISO_LIMIT};

/// Identifier of a vertex in an evaluated graph: the smallest creation
/// index (left-to-right over all atoms) among the vertices merged into it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One vertex created by an atom: the atom's preorder position in the
/// expression and the offset among the vertices it creates.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CreationId {
    pub atom: u32,
    pub offset: u64,
}

impl fmt::Display for CreationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.atom, self.offset)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexInfo {
    pub label: LabelId,
    pub provenance: BTreeSet<CreationId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("vertex {0} already exists")]
    DuplicateVertex(VertexId),
    #[error("vertex {0} does not exist")]
    UnknownVertex(VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("creation {0} belongs to two vertices")]
    SharedProvenance(CreationId),
    #[error("vertex {0} has empty provenance")]
    EmptyProvenance(VertexId),
}

/// Simple undirected graph with labeled vertices and creation provenance.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    vertices: BTreeMap<VertexId, VertexInfo>,
    adj: BTreeMap<VertexId, BTreeSet<VertexId>>,
    owner: BTreeMap<CreationId, VertexId>,
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(
        &mut self,
        id: VertexId,
        label: LabelId,
        provenance: BTreeSet<CreationId>,
    ) -> Result<(), GraphError> {
        if self.vertices.contains_key(&id) {
            return Err(GraphError::DuplicateVertex(id));
        }
        if provenance.is_empty() {
            return Err(GraphError::EmptyProvenance(id));
        }
        if let Some(c) = provenance.iter().find(|c| self.owner.contains_key(c)) {
            return Err(GraphError::SharedProvenance(*c));
        }
        for &c in &provenance {
            self.owner.insert(c, id);
        }
        self.vertices.insert(id, VertexInfo { label, provenance });
        self.adj.insert(id, BTreeSet::new());
        Ok(())
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool, GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        for w in [u, v] {
            if !self.vertices.contains_key(&w) {
                return Err(GraphError::UnknownVertex(w));
            }
        }
        let fresh = self.adj.get_mut(&u).unwrap().insert(v);
        self.adj.get_mut(&v).unwrap().insert(u);
        Ok(fresh)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &VertexInfo)> + '_ {
        self.vertices.iter().map(|(&v, info)| (v, info))
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.keys().copied()
    }

    pub fn info(&self, v: VertexId) -> Option<&VertexInfo> {
        self.vertices.get(&v)
    }

    pub fn label(&self, v: VertexId) -> Option<LabelId> {
        self.vertices.get(&v).map(|i| i.label)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.get(&v).into_iter().flatten().copied()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj.get(&v).map_or(0, BTreeSet::len)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj.get(&u).is_some_and(|n| n.contains(&v))
    }

    /// Edges as ordered pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, ns)| ns.range(u..).map(move |&v| (u, v)))
    }

    /// The vertex a creation ended up in.
    pub fn owner_of(&self, c: CreationId) -> Option<VertexId> {
        self.owner.get(&c).copied()
    }

    pub fn vertices_with_label(&self, label: LabelId) -> Vec<VertexId> {
        self.vertices
            .iter()
            .filter(|(_, i)| i.label == label)
            .map(|(&v, _)| v)
            .collect()
    }

    /// Disjoint union; vertex ids and creations must not collide.
    pub fn disjoint_union(mut self, other: LabeledGraph) -> Result<LabeledGraph, GraphError> {
        for (v, info) in other.vertices {
            self.add_vertex(v, info.label, info.provenance)?;
        }
        for (u, ns) in other.adj {
            for v in ns {
                self.add_edge(u, v)?;
            }
        }
        Ok(self)
    }

    /// Adds every absent edge between an `i`-vertex and a `j`-vertex.
    pub fn join_labels(&mut self, i: LabelId, j: LabelId) {
        if i == j {
            return;
        }
        let left = self.vertices_with_label(i);
        let right = self.vertices_with_label(j);
        for &u in &left {
            for &v in &right {
                self.add_edge(u, v).expect("both endpoints exist");
            }
        }
    }

    /// Every label `from` becomes `to`.
    pub fn relabel(&mut self, from: LabelId, to: LabelId) {
        for info in self.vertices.values_mut() {
            if info.label == from {
                info.label = to;
            }
        }
    }

    /// Same graph with all labels replaced by `label`.
    pub fn with_uniform_label(&self, label: LabelId) -> LabeledGraph {
        let mut g = self.clone();
        for info in g.vertices.values_mut() {
            info.label = label;
        }
        g
    }

    /// Renders the graph in PACE `.gr` format. Vertices are numbered
    /// 1..n in ascending [`VertexId`] order; when `with_dump` is set, a
    /// comment line per vertex records its id, label, provenance and
    /// neighbours.
    pub fn to_gr(&self, with_dump: bool) -> String {
        let rank: BTreeMap<VertexId, usize> =
            self.vertices.keys().enumerate().map(|(i, &v)| (v, i + 1)).collect();
        let mut out = String::new();
        let _ = writeln!(out, "p tw {} {}", self.vertex_count(), self.edge_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{} {}", rank[&u], rank[&v]);
        }
        if with_dump {
            for (v, info) in &self.vertices {
                let prov: Vec<String> = info.provenance.iter().map(ToString::to_string).collect();
                let adj: Vec<String> = self.neighbors(*v).map(|w| rank[&w].to_string()).collect();
                let _ = writeln!(
                    out,
                    "c v {} id {} label {} prov {} adj {}",
                    rank[v],
                    v,
                    info.label,
                    prov.join(","),
                    if adj.is_empty() { "-".to_string() } else { adj.join(",") }
                );
            }
        }
        out
    }

    /// Checks the structural invariants (used by tests and debug builds).
    pub fn check_invariants(&self) -> Result<(), GraphError> {
        let mut seen = BTreeSet::new();
        for (&v, info) in &self.vertices {
            if info.provenance.is_empty() {
                return Err(GraphError::EmptyProvenance(v));
            }
            for &c in &info.provenance {
                if !seen.insert(c) {
                    return Err(GraphError::SharedProvenance(c));
                }
            }
        }
        for (&u, ns) in &self.adj {
            if ns.contains(&u) {
                return Err(GraphError::SelfLoop(u));
            }
            for &v in ns {
                if !self.adj.get(&v).is_some_and(|b| b.contains(&u)) {
                    return Err(GraphError::UnknownVertex(v));
                }
            }
        }
        Ok(())
    }
}

/// Merges all vertices labeled `label` into one vertex that keeps the
/// smallest id, the union of provenances, and the neighbours outside the
/// merged set. With fewer than two such vertices the graph is unchanged.
pub fn fuse_label(g: &LabeledGraph, label: LabelId) -> LabeledGraph {
    let members = g.vertices_with_label(label);
    if members.len() < 2 {
        return g.clone();
    }
    let merged: BTreeSet<VertexId> = members.iter().copied().collect();
    let keep = members[0];
    let mut provenance = BTreeSet::new();
    let mut outside = BTreeSet::new();
    for &m in &members {
        provenance.extend(g.vertices[&m].provenance.iter().copied());
        outside.extend(g.neighbors(m).filter(|w| !merged.contains(w)));
    }
    let mut out = LabeledGraph::new();
    for (v, info) in g.vertices() {
        if v == keep {
            out.add_vertex(v, label, provenance.clone()).unwrap();
        } else if !merged.contains(&v) {
            out.add_vertex(v, info.label, info.provenance.clone()).unwrap();
        }
    }
    for (u, v) in g.edges() {
        if !merged.contains(&u) && !merged.contains(&v) {
            out.add_edge(u, v).unwrap();
        }
    }
    for w in outside {
        out.add_edge(keep, w).unwrap();
    }
    out
}

impl fmt::Debug for LabeledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LabeledGraph")
            .field("vertices", &self.vertices.iter().map(|(v, i)| (v.0, i.label.get())).collect::<Vec<_>>())
            .field("edges", &self.edges().map(|(u, v)| (u.0, v.0)).collect::<Vec<_>>())
            .finish()
    }
}
