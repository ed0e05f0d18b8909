//! Conversions between clique-width and fusion-tree expressions, and the
//! normalization passes used by the dynamic program.

mod localize;
mod prune;
mod to_cw;

use std::collections::BTreeMap;

use crate::expr::{validate_expression, Expression, LabelId, Op, ValidationReport};
use crate::graph::{derive_certificate, evaluate, AtomSource, ConversionCertificate, CreationId};

pub use localize::{localize_merges, localize_merges_certified};
pub use prune::{prune_size_constant, prune_useless_vertices, prune_useless_vertices_certified};
pub use to_cw::{fusion_to_cw, fusion_to_cw_detailed, CompositeLabel, CwConversion, MergePlan, PlanEntry};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConvertError {
    #[error("expression is not in clique-width form")]
    NotCliqueWidthForm(ValidationReport),
}

/// A clique-width expression is already a fusion-tree expression.
pub fn cw_to_fusion(e: &Expression) -> Result<Expression, ConvertError> {
    let report = validate_expression(e, true);
    if !report.is_valid() {
        return Err(ConvertError::NotCliqueWidthForm(report));
    }
    Ok(e.clone())
}

/// Label counts of the graph at every node, without building the graph.
pub(crate) fn census(ops: &[Op]) -> Vec<BTreeMap<LabelId, u64>> {
    let mut out: Vec<BTreeMap<LabelId, u64>> = Vec::with_capacity(ops.len());
    let mut stack: Vec<usize> = Vec::new();
    for (idx, op) in ops.iter().enumerate() {
        let counts = match *op {
            Op::Verts { label, count } => BTreeMap::from([(label, count)]),
            Op::Join { .. } => out[stack.pop().expect("operand")].clone(),
            Op::Relabel { from, to } => {
                let mut c = out[stack.pop().expect("operand")].clone();
                if from != to {
                    if let Some(n) = c.remove(&from) {
                        let e = c.entry(to).or_insert(0);
                        *e = e.saturating_add(n);
                    }
                }
                c
            }
            Op::Fuse { label } => {
                let mut c = out[stack.pop().expect("operand")].clone();
                if let Some(n) = c.get_mut(&label) {
                    *n = (*n).min(1);
                }
                c
            }
            Op::Union => {
                let r = stack.pop().expect("operand");
                let l = stack.pop().expect("operand");
                let mut c = out[l].clone();
                for (&k, &n) in &out[r] {
                    let e = c.entry(k).or_insert(0);
                    *e = e.saturating_add(n);
                }
                c
            }
        };
        out.push(counts);
        stack.push(idx);
    }
    out
}

/// Postorder indices of the atoms of `ops`.
pub(crate) fn atom_indices(ops: &[Op]) -> Vec<usize> {
    ops.iter()
        .enumerate()
        .filter(|(_, op)| matches!(op, Op::Verts { .. }))
        .map(|(i, _)| i)
        .collect()
}

/// Certificate for a rewrite whose output atoms are a subsequence of the
/// input atoms: output atom `k` stands for input atom `kept[k]` (a
/// postorder index in `input`), with creation offsets preserved.
pub(crate) fn certify_atom_subsequence(
    input: &Expression,
    output: &Expression,
    kept: &[usize],
) -> ConversionCertificate {
    let in_graph = evaluate(input);
    let out_graph = evaluate(output);
    let pre = input.preorder_positions();
    let sources: BTreeMap<usize, AtomSource> = atom_indices(output.ops())
        .into_iter()
        .zip(kept)
        .map(|(o, &i)| {
            let base = CreationId {
                atom: pre[i] as u32,
                offset: 0,
            };
            (o, AtomSource::Creation(base))
        })
        .collect();
    derive_certificate(&in_graph, output, &out_graph, &sources).expect("rewrite preserves creations")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cw_embedding_is_identity() {
        let e: Expression = "(ren 2 1 (join 1 2 (union (vert 1) (vert 2))))".parse().unwrap();
        assert_eq!(cw_to_fusion(&e).unwrap(), e);
        let f: Expression = "(fuse 1 (verts 1 2))".parse().unwrap();
        assert!(matches!(cw_to_fusion(&f), Err(ConvertError::NotCliqueWidthForm(_))));
    }

    #[test]
    fn census_tracks_counts() {
        let e: Expression = "(fuse 2 (ren 1 2 (union (verts 1 3) (verts 2 2))))".parse().unwrap();
        let c = census(e.ops());
        let l = |v| LabelId::new(v).unwrap();
        assert_eq!(c[2], BTreeMap::from([(l(1), 3), (l(2), 2)]));
        assert_eq!(c[3], BTreeMap::from([(l(2), 5)]));
        assert_eq!(c[4], BTreeMap::from([(l(2), 1)]));
    }
}
