use std::collections::{BTreeMap, BTreeSet};

use super::poly::{LabelSet, LabeledPolynomial};
use super::rules::{
    base_polynomial, join_in_place, merge_after_relabel_owned, merge_after_union_owned, relabel_owned,
};
use num_traits::Zero;

use super::IspError;
use crate::expr::{Expression, LabelId, Op};

/// Number of vertices per label in the graph of a subexpression. Enough
/// to check the merge preconditions without building the graph.
type Census = BTreeMap<LabelId, u64>;

struct Entry {
    poly: LabeledPolynomial,
    census: Census,
}

fn count(c: &Census, l: LabelId) -> u64 {
    c.get(&l).copied().unwrap_or(0)
}

/// Labeled independent-set polynomial of the graph of `e`.
///
/// The expression is first passed through
/// [`localize_merges`](crate::convert::localize_merges); every fuse must
/// then merge at most two vertices directly after a union or a relabel.
pub fn labeled_isp(e: &Expression) -> Result<LabeledPolynomial, IspError> {
    let local = crate::convert::localize_merges(e);
    labeled_isp_localized(&local)
}

/// Runs the dynamic program on an expression that is already localized.
pub fn labeled_isp_localized(e: &Expression) -> Result<LabeledPolynomial, IspError> {
    let mut out = None;
    run(e, &mut |_, p| out = Some(p.clone()), false)?;
    // root is the last recorded node; in fast mode only the root is reported
    Ok(out.expect("nonempty expression"))
}

/// Polynomial of every subexpression of a localized expression, indexed
/// by postorder node index.
pub fn labeled_isp_trace(e: &Expression) -> Result<Vec<LabeledPolynomial>, IspError> {
    let mut out = vec![LabeledPolynomial::zero(); e.len()];
    run(e, &mut |idx, p| out[idx] = p.clone(), true)?;
    Ok(out)
}

fn run(e: &Expression, record: &mut dyn FnMut(usize, &LabeledPolynomial), trace: bool) -> Result<(), IspError> {
    let ops = e.ops();
    let mut stack: Vec<Entry> = Vec::new();
    let mut idx = 0;
    while idx < ops.len() {
        match ops[idx] {
            Op::Verts { label, count } => {
                stack.push(Entry {
                    poly: base_polynomial(label, count)?,
                    census: BTreeMap::from([(label, count)]),
                });
            }
            Op::Join { i, j } => {
                let top = stack.last_mut().expect("operand");
                join_in_place(&mut top.poly, i, j)?;
            }
            Op::Relabel { from, to } => {
                let top = stack.last_mut().expect("operand");
                let followed_by_fuse = matches!(ops.get(idx + 1), Some(Op::Fuse { label }) if *label == to);
                let (cf, ct) = (count(&top.census, from), count(&top.census, to));
                if from != to && followed_by_fuse && cf >= 1 && ct >= 1 {
                    if cf > 1 || ct > 1 {
                        return Err(IspError::NotLocalized { node: idx + 1 });
                    }
                    let both = [from, to].into_iter().collect::<LabelSet>();
                    if top.poly.coefficient(2, &both).is_zero() {
                        return Err(IspError::AdjacentMergeUnsupported { node: idx + 1 });
                    }
                    let poly = std::mem::take(&mut top.poly);
                    if trace {
                        record(idx, &relabel_owned(poly.clone(), from, to));
                    }
                    top.poly = merge_after_relabel_owned(poly, from, to)?;
                    top.census.remove(&from);
                    top.census.insert(to, 1);
                    idx += 1;
                } else if from != to {
                    let poly = std::mem::take(&mut top.poly);
                    top.poly = relabel_owned(poly, from, to);
                    if let Some(c) = top.census.remove(&from) {
                        *top.census.entry(to).or_insert(0) += c;
                    }
                }
            }
            Op::Fuse { label } => {
                let top = stack.last().expect("operand");
                if count(&top.census, label) > 1 {
                    return Err(IspError::NotLocalized { node: idx });
                }
            }
            Op::Union => {
                let right = stack.pop().expect("operand");
                let left = stack.pop().expect("operand");
                let mut census = left.census.clone();
                for (&l, &c) in &right.census {
                    *census.entry(l).or_insert(0) += c;
                }
                let mut merged = BTreeSet::new();
                let mut end = idx;
                while let Some(Op::Fuse { label }) = ops.get(end + 1) {
                    end += 1;
                    if merged.contains(label) {
                        continue;
                    }
                    match (count(&left.census, *label), count(&right.census, *label)) {
                        (1, 1) => {
                            merged.insert(*label);
                            census.insert(*label, 1);
                        }
                        (a, b) if a + b <= 1 => {}
                        _ => return Err(IspError::NotLocalized { node: end }),
                    }
                }
                let poly = if trace {
                    let mut so_far = BTreeSet::new();
                    let mut last = merge_after_union_owned(left.poly.clone(), right.poly.clone(), &so_far)?;
                    record(idx, &last);
                    for (k, op) in ops[idx + 1..=end].iter().enumerate() {
                        if let Op::Fuse { label } = op {
                            if merged.contains(label) && so_far.insert(*label) {
                                last = merge_after_union_owned(left.poly.clone(), right.poly.clone(), &so_far)?;
                            }
                        }
                        if idx + 1 + k < end {
                            record(idx + 1 + k, &last);
                        }
                    }
                    last
                } else {
                    merge_after_union_owned(left.poly, right.poly, &merged)?
                };
                stack.push(Entry { poly, census });
                idx = end;
            }
        }
        if trace || idx + 1 == ops.len() {
            record(idx, &stack.last().expect("operand").poly);
        }
        idx += 1;
    }
    Ok(())
}
