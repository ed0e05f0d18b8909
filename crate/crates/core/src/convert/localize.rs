use std::collections::BTreeSet;

use super::{atom_indices, census, certify_atom_subsequence};
use crate::expr::{subtree_starts, Expression, LabelId, Op};
use crate::graph::ConversionCertificate;

/// Moves every merge down to where it takes effect.
///
/// A fuse commutes with joins, with relabels of other labels and with
/// other fuses, and distributes over unions, so each fuse is pushed down
/// as a pending label set. It is re-emitted only directly above a union
/// whose two sides both carry the label, or directly above `ren a b` when
/// both `a` and `b` are present; at that point each side holds exactly one
/// such vertex. Atoms whose label is pending are created once, since all
/// their vertices would be merged with nothing in between.
pub fn localize_merges(e: &Expression) -> Expression {
    localize(e).0
}

/// [`localize_merges`] with a certificate against the input graph.
pub fn localize_merges_certified(e: &Expression) -> (Expression, ConversionCertificate) {
    let (out, kept) = localize(e);
    let cert = certify_atom_subsequence(e, &out, &kept);
    (out, cert)
}

fn localize(e: &Expression) -> (Expression, Vec<usize>) {
    let ops = e.ops();
    let atoms = atom_indices(ops);
    if !ops.iter().any(|op| matches!(op, Op::Fuse { .. })) {
        return (e.clone(), atoms);
    }
    let counts = census(ops);
    let present = |idx: usize, l: LabelId| counts[idx].get(&l).is_some_and(|&c| c > 0);
    let starts = subtree_starts(ops);

    // labels whose classes will be merged, top down
    let mut pending: Vec<BTreeSet<LabelId>> = vec![BTreeSet::new(); ops.len()];
    for idx in (0..ops.len()).rev() {
        let p = std::mem::take(&mut pending[idx]);
        let restrict = |child: usize, set: BTreeSet<LabelId>| -> BTreeSet<LabelId> {
            set.into_iter().filter(|&l| present(child, l)).collect()
        };
        match ops[idx] {
            Op::Verts { .. } => {}
            Op::Join { .. } => pending[idx - 1] = p.clone(),
            Op::Relabel { from, to } => {
                let mut c = p.clone();
                if from != to {
                    c.remove(&from);
                    if c.contains(&to) {
                        c.insert(from);
                    }
                }
                pending[idx - 1] = restrict(idx - 1, c);
            }
            Op::Fuse { label } => {
                let mut c = p.clone();
                c.insert(label);
                pending[idx - 1] = restrict(idx - 1, c);
            }
            Op::Union => {
                let right = idx - 1;
                let left = starts[right] - 1;
                pending[left] = restrict(left, p.clone());
                pending[right] = restrict(right, p.clone());
            }
        }
        pending[idx] = p;
    }

    let mut out = Vec::with_capacity(ops.len());
    for (idx, &op) in ops.iter().enumerate() {
        match op {
            Op::Verts { label, count } => {
                let count = if pending[idx].contains(&label) { 1 } else { count };
                out.push(Op::Verts { label, count });
            }
            Op::Join { .. } => out.push(op),
            Op::Relabel { from, to } => {
                out.push(op);
                if from != to && pending[idx].contains(&to) && present(idx - 1, from) && present(idx - 1, to) {
                    out.push(Op::Fuse { label: to });
                }
            }
            Op::Fuse { .. } => {}
            Op::Union => {
                out.push(op);
                let right = idx - 1;
                let left = starts[right] - 1;
                for &l in &pending[idx] {
                    if present(left, l) && present(right, l) {
                        out.push(Op::Fuse { label: l });
                    }
                }
            }
        }
    }
    let out = Expression::from_ops(out).expect("rewrite keeps the tree shape");
    (out, atoms)
}
