use std::collections::BTreeMap;
use std::fmt::{self, Write};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::expr::LabelId;

/// A finite set of labels, kept sorted. Ordering is lexicographic on the
/// sorted sequence.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelSet(Vec<LabelId>);

impl LabelSet {
    pub fn empty() -> Self {
        LabelSet(Vec::new())
    }

    pub fn singleton(l: LabelId) -> Self {
        LabelSet(vec![l])
    }

    pub fn contains(&self, l: LabelId) -> bool {
        self.0.binary_search(&l).is_ok()
    }

    pub fn insert(&mut self, l: LabelId) -> bool {
        match self.0.binary_search(&l) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, l);
                true
            }
        }
    }

    pub fn remove(&mut self, l: LabelId) -> bool {
        match self.0.binary_search(&l) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &LabelSet) -> LabelSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    out.push(x.min(y));
                    if x <= y {
                        a.next();
                    }
                    if y <= x {
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        LabelSet(out)
    }

    pub fn as_slice(&self) -> &[LabelId] {
        &self.0
    }
}

impl FromIterator<LabelId> for LabelSet {
    fn from_iter<I: IntoIterator<Item = LabelId>>(iter: I) -> Self {
        let mut v: Vec<LabelId> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        LabelSet(v)
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("term of degree {degree} cannot carry {labels} labels")]
    InconsistentTerm { degree: u32, labels: usize },
}

/// Coefficients of one label pattern, indexed by x-degree. Trailing zeros
/// are trimmed; a stored row is never all-zero.
pub(crate) type Row = Vec<BigUint>;

/// The labeled independent-set polynomial: a map from (x-degree, label
/// set) to a positive coefficient, including the constant term 1 for the
/// empty set.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct LabeledPolynomial {
    pub(crate) rows: BTreeMap<LabelSet, Row>,
}

pub(crate) fn trim(row: &mut Row) {
    while row.last().is_some_and(Zero::is_zero) {
        row.pop();
    }
}

/// `dst[d + shift] += src[d]`
pub(crate) fn add_shifted(dst: &mut Row, src: &[BigUint], shift: usize) {
    if dst.len() < src.len() + shift {
        dst.resize(src.len() + shift, BigUint::zero());
    }
    for (d, c) in src.iter().enumerate() {
        if !c.is_zero() {
            dst[d + shift] += c;
        }
    }
}

impl LabeledPolynomial {
    /// The polynomial `1` (only the empty set, of the empty graph).
    pub fn one() -> Self {
        let mut rows = BTreeMap::new();
        rows.insert(LabelSet::empty(), vec![BigUint::one()]);
        LabeledPolynomial { rows }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a polynomial from `(degree, labels, coefficient)` terms;
    /// repeated keys are added and zero coefficients are skipped.
    pub fn from_terms<I>(terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (u32, LabelSet, BigUint)>,
    {
        let mut p = LabeledPolynomial::default();
        for (degree, labels, c) in terms {
            if c.is_zero() {
                continue;
            }
            if (degree as usize) < labels.len() || (degree == 0) != labels.is_empty() {
                return Err(PolyError::InconsistentTerm {
                    degree,
                    labels: labels.len(),
                });
            }
            let row = p.rows.entry(labels).or_default();
            if row.len() <= degree as usize {
                row.resize(degree as usize + 1, BigUint::zero());
            }
            row[degree as usize] += c;
        }
        Ok(p)
    }

    /// Shorthand for tests and examples: labels and coefficients as small
    /// integers.
    pub fn from_small(terms: &[(u32, &[u32], u64)]) -> Result<Self, PolyError> {
        Self::from_terms(terms.iter().map(|&(d, s, c)| {
            let set = s.iter().map(|&l| LabelId::new(l).expect("positive label")).collect();
            (d, set, BigUint::from(c))
        }))
    }

    pub(crate) fn insert_row(&mut self, set: LabelSet, mut row: Row) {
        trim(&mut row);
        if row.is_empty() {
            return;
        }
        match self.rows.get_mut(&set) {
            Some(existing) => add_shifted(existing, &row, 0),
            None => {
                self.rows.insert(set, row);
            }
        }
    }

    pub fn coefficient(&self, degree: u32, labels: &LabelSet) -> BigUint {
        self.rows
            .get(labels)
            .and_then(|r| r.get(degree as usize))
            .cloned()
            .unwrap_or_default()
    }

    /// Nonzero terms ordered by ascending degree, then label set.
    pub fn terms(&self) -> Vec<(u32, &LabelSet, &BigUint)> {
        let mut out: Vec<(u32, &LabelSet, &BigUint)> = self
            .rows
            .iter()
            .flat_map(|(s, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(move |(d, c)| (d as u32, s, c))
            })
            .collect();
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }

    pub fn term_count(&self) -> usize {
        self.rows
            .values()
            .map(|r| r.iter().filter(|c| !c.is_zero()).count())
            .sum()
    }

    /// Number of distinct label sets with a nonzero term.
    pub fn pattern_count(&self) -> usize {
        self.rows.len()
    }

    pub fn patterns(&self) -> impl Iterator<Item = &LabelSet> {
        self.rows.keys()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.rows.values().map(|r| r.len() as u32 - 1).max()
    }

    /// Sum of all coefficients (the number of independent sets, counting
    /// the empty one).
    pub fn total(&self) -> BigUint {
        self.rows.values().flatten().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Checks the representation invariants: every stored row is nonzero
    /// and trimmed, degree 0 occurs only with the empty set, and no term
    /// has fewer vertices than labels.
    pub fn check_invariants(&self) -> Result<(), PolyError> {
        for (s, row) in &self.rows {
            let bad = |degree: usize| PolyError::InconsistentTerm {
                degree: degree as u32,
                labels: s.len(),
            };
            if row.last().is_none_or(Zero::is_zero) {
                return Err(bad(row.len()));
            }
            for (d, c) in row.iter().enumerate() {
                if !c.is_zero() && (d < s.len() || (d == 0) != s.is_empty()) {
                    return Err(bad(d));
                }
            }
        }
        Ok(())
    }

    /// One term per line: `x^d * x{S} : c`, the constant as `1 : c`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (d, s, c) in self.terms() {
            if d == 0 {
                let _ = writeln!(out, "1 : {c}");
            } else {
                let labels: Vec<String> = s.iter().map(|l| l.to_string()).collect();
                let _ = writeln!(out, "x^{d} * x{{{}}} : {c}", labels.join(","));
            }
        }
        out
    }
}

impl fmt::Debug for LabeledPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (d, s, c) in self.terms() {
            m.entry(&(d, s), &format_args!("{c}"));
        }
        m.finish()
    }
}

impl fmt::Display for LabeledPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// `sum_{d >= 1} a_d x^d`; zero coefficients are never stored.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct UnivariatePolynomial {
    coefficients: BTreeMap<u32, BigUint>,
}

impl UnivariatePolynomial {
    /// Drops zero coefficients; degree 0 is rejected.
    pub fn from_coefficients<I: IntoIterator<Item = (u32, BigUint)>>(iter: I) -> Option<Self> {
        let mut coefficients = BTreeMap::new();
        for (d, c) in iter {
            if c.is_zero() {
                continue;
            }
            if d == 0 {
                return None;
            }
            *coefficients.entry(d).or_insert_with(BigUint::zero) += c;
        }
        Some(UnivariatePolynomial { coefficients })
    }

    pub fn from_small(coeffs: &[(u32, u64)]) -> Self {
        Self::from_coefficients(coeffs.iter().map(|&(d, c)| (d, BigUint::from(c))))
            .expect("degrees start at 1")
    }

    pub fn coefficient(&self, degree: u32) -> BigUint {
        self.coefficients.get(&degree).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &BigUint)> {
        self.coefficients.iter().map(|(&d, c)| (d, c))
    }

    pub fn degree(&self) -> Option<u32> {
        self.coefficients.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `d : c` per line, ascending degree.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (d, c) in &self.coefficients {
            let _ = writeln!(out, "{d} : {c}");
        }
        out
    }
}

impl fmt::Debug for UnivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficients.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.coefficients.iter().map(|(d, c)| format!("{c}x^{d}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Display for UnivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
