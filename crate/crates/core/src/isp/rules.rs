use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::poly::{add_shifted, LabelSet, LabeledPolynomial, Row, UnivariatePolynomial};
use super::IspError;
use crate::expr::LabelId;

/// `1 + sum_{j=1..m} C(m,j) x^j x_i`: the edgeless graph on `m` vertices
/// labeled `i`.
pub fn base_polynomial(i: LabelId, m: u64) -> Result<LabeledPolynomial, IspError> {
    if m == 0 {
        return Err(IspError::InvalidCount);
    }
    let mut p = LabeledPolynomial::one();
    let mut row: Row = Vec::with_capacity(m as usize + 1);
    row.push(BigUint::zero());
    let mut c = BigUint::one();
    for j in 1..=m {
        c = c * BigUint::from(m - j + 1) / BigUint::from(j);
        row.push(c.clone());
    }
    p.rows.insert(LabelSet::singleton(i), row);
    Ok(p)
}

/// Drops every term whose label set contains both `i` and `j`.
pub fn apply_join(p: &LabeledPolynomial, i: LabelId, j: LabelId) -> Result<LabeledPolynomial, IspError> {
    let mut out = p.clone();
    join_in_place(&mut out, i, j)?;
    Ok(out)
}

pub(crate) fn join_in_place(p: &mut LabeledPolynomial, i: LabelId, j: LabelId) -> Result<(), IspError> {
    if i == j {
        return Err(IspError::EqualLabels(i));
    }
    p.rows.retain(|s, _| !(s.contains(i) && s.contains(j)));
    Ok(())
}

/// Replaces `i` by `j` in every label set, adding colliding terms.
pub fn apply_relabel(p: &LabeledPolynomial, i: LabelId, j: LabelId) -> LabeledPolynomial {
    relabel_owned(p.clone(), i, j)
}

pub(crate) fn relabel_owned(mut p: LabeledPolynomial, i: LabelId, j: LabelId) -> LabeledPolynomial {
    if i == j {
        return p;
    }
    let moved: Vec<LabelSet> = p.rows.keys().filter(|s| s.contains(i)).cloned().collect();
    for s in moved {
        let row = p.rows.remove(&s).expect("listed key");
        let mut t = s;
        t.remove(i);
        t.insert(j);
        p.insert_row(t, row);
    }
    p
}

/// Removes `shift` degrees from a product row after merging, checking
/// that no term would end with fewer vertices than labels.
fn lower(mut row: Row, shift: usize, labels: &LabelSet) -> Result<Row, IspError> {
    if row.iter().take(shift).any(|c| !c.is_zero()) {
        return Err(IspError::DegreeUnderflow { labels: labels.clone() });
    }
    row.drain(..shift.min(row.len()));
    if row.iter().take(labels.len()).any(|c| !c.is_zero()) {
        return Err(IspError::DegreeUnderflow { labels: labels.clone() });
    }
    Ok(row)
}

fn single_one(row: &Row) -> Option<usize> {
    let mut found = None;
    for (d, c) in row.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if found.is_some() || !c.is_one() {
            return None;
        }
        found = Some(d);
    }
    found
}

fn convolve(a: &Row, b: &Row) -> Row {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// Product of the polynomials of two disjoint graphs, followed by the
/// merge of one vertex from each side for every label in `merged`.
///
/// A product term in which a merged label occurs on exactly one side is
/// deleted; one occurring on both sides stands for the merged vertex,
/// counted twice, so the degree drops by one. With `merged` empty this is
/// the plain disjoint-union product.
pub fn merge_after_union(
    p1: &LabeledPolynomial,
    p2: &LabeledPolynomial,
    merged: &BTreeSet<LabelId>,
) -> Result<LabeledPolynomial, IspError> {
    merge_after_union_owned(p1.clone(), p2.clone(), merged)
}

pub(crate) fn merge_after_union_owned(
    p1: LabeledPolynomial,
    p2: LabeledPolynomial,
    merged: &BTreeSet<LabelId>,
) -> Result<LabeledPolynomial, IspError> {
    // drain the larger factor so its rows can be moved rather than copied
    let (big, small) = if p1.term_count() >= p2.term_count() {
        (p1, p2)
    } else {
        (p2, p1)
    };
    let partners: Vec<(LabelSet, &Row, Option<usize>)> = small
        .rows
        .iter()
        .map(|(s, r)| (s.clone(), r, single_one(r)))
        .collect();
    let mut out = LabeledPolynomial::zero();
    for (s1, row1) in big.rows {
        let mut targets = Vec::new();
        for (k, (s2, _, _)) in partners.iter().enumerate() {
            let mut shift = 0;
            let mut keep = true;
            for &m in merged {
                match (s1.contains(m), s2.contains(m)) {
                    (true, true) => shift += 1,
                    (false, false) => {}
                    _ => {
                        keep = false;
                        break;
                    }
                }
            }
            if keep {
                targets.push((k, shift));
            }
        }
        let mut row1 = Some(row1);
        let last = targets.len();
        for (n, (k, shift)) in targets.into_iter().enumerate() {
            let (s2, row2, mono) = &partners[k];
            let labels = s1.union(s2);
            let product = match mono {
                Some(t) => {
                    let base = if n + 1 == last {
                        row1.take().expect("row still owned")
                    } else {
                        row1.as_ref().expect("row still owned").clone()
                    };
                    let mut shifted = Vec::with_capacity(base.len() + t);
                    shifted.resize(*t, BigUint::zero());
                    shifted.extend(base);
                    shifted
                }
                None => convolve(row1.as_ref().expect("row still owned"), row2),
            };
            let row = lower(product, shift, &labels)?;
            out.insert_row(labels, row);
        }
    }
    Ok(out)
}

/// The rule for `fuse j` directly after `ren i j`, when exactly one
/// vertex carried `i` and one carried `j` and the two are not adjacent.
pub fn merge_after_relabel(p: &LabeledPolynomial, i: LabelId, j: LabelId) -> Result<LabeledPolynomial, IspError> {
    merge_after_relabel_owned(p.clone(), i, j)
}

pub(crate) fn merge_after_relabel_owned(
    p: LabeledPolynomial,
    i: LabelId,
    j: LabelId,
) -> Result<LabeledPolynomial, IspError> {
    if i == j {
        return Err(IspError::EqualLabels(i));
    }
    let mut out = LabeledPolynomial::zero();
    for (s, row) in p.rows {
        match (s.contains(i), s.contains(j)) {
            (false, false) => out.insert_row(s, row),
            (true, true) => {
                let mut t = s;
                t.remove(i);
                let row = lower(row, 1, &t)?;
                out.insert_row(t, row);
            }
            _ => {}
        }
    }
    Ok(out)
}

/// `I(x) = P(x, 1, ..., 1)` without the constant term.
pub fn extract_univariate(p: &LabeledPolynomial) -> UnivariatePolynomial {
    let mut sums: Row = Vec::new();
    for row in p.rows.values() {
        add_shifted(&mut sums, row, 0);
    }
    UnivariatePolynomial::from_coefficients(
        sums.into_iter()
            .enumerate()
            .skip(1)
            .map(|(d, c)| (d as u32, c)),
    )
    .expect("degree 0 skipped")
}
