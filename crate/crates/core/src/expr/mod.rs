//! Fusion-tree expressions.
//!
//! An [`Expression`] is stored in postorder (reverse Polish) form: every
//! operation follows its operands, and the root is the last element. This
//! keeps construction, equality and evaluation iterative, so expressions
//! that are tens of thousands of levels deep are handled without recursion.

mod parse;
mod render;

use std::collections::BTreeSet;
use std::fmt;
use std::num::NonZeroU32;

pub use parse::{parse_expression, ParseError};
pub use render::render_expression;

/// A vertex label. Labels are positive integers.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(NonZeroU32);

impl LabelId {
    pub const fn new(value: u32) -> Option<LabelId> {
        match NonZeroU32::new(value) {
            Some(v) => Some(LabelId(v)),
            None => None,
        }
    }

    #[inline]
    pub const fn get(self) -> u32 {
        self.0.get()
    }
}

impl fmt::Debug for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<NonZeroU32> for LabelId {
    fn from(v: NonZeroU32) -> Self {
        LabelId(v)
    }
}

/// One operation of an expression in postorder.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Op {
    /// `count` isolated vertices labeled `label`.
    Verts { label: LabelId, count: u64 },
    /// Edges between every `i`-vertex and every `j`-vertex.
    Join { i: LabelId, j: LabelId },
    /// Every label `from` becomes `to`.
    Relabel { from: LabelId, to: LabelId },
    /// Merge all vertices labeled `label` into one.
    Fuse { label: LabelId },
    /// Disjoint union of the two preceding operands.
    Union,
}

impl Op {
    /// Number of operands consumed.
    pub fn arity(&self) -> usize {
        match self {
            Op::Verts { .. } => 0,
            Op::Union => 2,
            _ => 1,
        }
    }

    /// Labels mentioned by this operation.
    pub fn labels(&self) -> impl Iterator<Item = LabelId> {
        let (a, b) = match *self {
            Op::Verts { label, .. } | Op::Fuse { label } => (Some(label), None),
            Op::Join { i, j } => (Some(i), Some(j)),
            Op::Relabel { from, to } => (Some(from), Some(to)),
            Op::Union => (None, None),
        };
        a.into_iter().chain(b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("operation {index} has too few operands")]
    MissingOperand { index: usize },
    #[error("operation list leaves {roots} roots, expected exactly one")]
    NotATree { roots: usize },
    #[error("join at operation {index} uses label {label} on both sides")]
    EqualJoinLabels { index: usize, label: LabelId },
    #[error("vertex atom at operation {index} has count 0")]
    ZeroCount { index: usize },
}

/// An immutable fusion-tree expression (which includes every k-expression).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expression {
    ops: Vec<Op>,
}

/// Borrowed view of one node and its operands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node<'a> {
    Verts { label: LabelId, count: u64 },
    Join { i: LabelId, j: LabelId, child: ExprRef<'a> },
    Relabel { from: LabelId, to: LabelId, child: ExprRef<'a> },
    Fuse { label: LabelId, child: ExprRef<'a> },
    Union { left: ExprRef<'a>, right: ExprRef<'a> },
}

/// A borrowed subexpression: a postorder slice whose last op is the root.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct ExprRef<'a> {
    ops: &'a [Op],
}

impl fmt::Debug for ExprRef<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render::render_ops(self.ops))
    }
}

impl<'a> ExprRef<'a> {
    pub fn ops(&self) -> &'a [Op] {
        self.ops
    }

    pub fn to_owned(&self) -> Expression {
        Expression {
            ops: self.ops.to_vec(),
        }
    }

    /// Structural view of the root.
    pub fn node(&self) -> Node<'a> {
        let n = self.ops.len();
        let last = self.ops[n - 1];
        let below = &self.ops[..n - 1];
        match last {
            Op::Verts { label, count } => Node::Verts { label, count },
            Op::Join { i, j } => Node::Join {
                i,
                j,
                child: ExprRef { ops: below },
            },
            Op::Relabel { from, to } => Node::Relabel {
                from,
                to,
                child: ExprRef { ops: below },
            },
            Op::Fuse { label } => Node::Fuse {
                label,
                child: ExprRef { ops: below },
            },
            Op::Union => {
                let split = subtree_start(below, below.len() - 1);
                Node::Union {
                    left: ExprRef {
                        ops: &below[..split],
                    },
                    right: ExprRef {
                        ops: &below[split..],
                    },
                }
            }
        }
    }
}

/// Start index of the subtree rooted at `root` (scan backwards).
fn subtree_start(ops: &[Op], root: usize) -> usize {
    let mut need = 1usize;
    let mut i = root + 1;
    while need > 0 {
        i -= 1;
        need = need - 1 + ops[i].arity();
    }
    i
}

impl Expression {
    /// Builds an expression from a postorder operation list, checking
    /// arity and the per-operation invariants.
    pub fn from_ops(ops: Vec<Op>) -> Result<Expression, ExprError> {
        let mut depth = 0usize;
        for (index, op) in ops.iter().enumerate() {
            match *op {
                Op::Verts { count: 0, .. } => return Err(ExprError::ZeroCount { index }),
                Op::Join { i, j } if i == j => {
                    return Err(ExprError::EqualJoinLabels { index, label: i })
                }
                _ => {}
            }
            let arity = op.arity();
            if depth < arity {
                return Err(ExprError::MissingOperand { index });
            }
            depth = depth - arity + 1;
        }
        if depth != 1 {
            return Err(ExprError::NotATree { roots: depth });
        }
        Ok(Expression { ops })
    }

    /// `count` isolated vertices labeled `label`.
    ///
    /// # Panics
    /// If `count` is zero.
    pub fn verts(label: LabelId, count: u64) -> Expression {
        assert!(count >= 1, "vertex atoms create at least one vertex");
        Expression {
            ops: vec![Op::Verts { label, count }],
        }
    }

    pub fn vert(label: LabelId) -> Expression {
        Expression::verts(label, 1)
    }

    /// # Panics
    /// If `i == j`.
    pub fn join(mut self, i: LabelId, j: LabelId) -> Expression {
        assert_ne!(i, j, "join labels must differ");
        self.ops.push(Op::Join { i, j });
        self
    }

    pub fn relabel(mut self, from: LabelId, to: LabelId) -> Expression {
        self.ops.push(Op::Relabel { from, to });
        self
    }

    pub fn fuse(mut self, label: LabelId) -> Expression {
        self.ops.push(Op::Fuse { label });
        self
    }

    pub fn union(mut left: Expression, right: Expression) -> Expression {
        left.ops.extend_from_slice(&right.ops);
        left.ops.push(Op::Union);
        left
    }

    /// Left-folded union of a nonempty sequence.
    pub fn union_all<I: IntoIterator<Item = Expression>>(parts: I) -> Option<Expression> {
        parts.into_iter().reduce(Expression::union)
    }

    /// Appends a unary operation. Used by the rewriting passes.
    pub(crate) fn push_unary(&mut self, op: Op) {
        debug_assert_eq!(op.arity(), 1);
        if let Op::Join { i, j } = op {
            assert_ne!(i, j);
        }
        self.ops.push(op);
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_ref(&self) -> ExprRef<'_> {
        ExprRef { ops: &self.ops }
    }

    pub fn node(&self) -> Node<'_> {
        self.as_ref().node()
    }

    /// For every operation, the index where its subtree starts.
    pub fn subtree_starts(&self) -> Vec<usize> {
        subtree_starts(&self.ops)
    }

    /// For every operation, the index of its parent (`None` for the root).
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parents = vec![None; self.ops.len()];
        let mut stack: Vec<usize> = Vec::new();
        for (idx, op) in self.ops.iter().enumerate() {
            for _ in 0..op.arity() {
                let child = stack.pop().expect("validated expression");
                parents[child] = Some(idx);
            }
            stack.push(idx);
        }
        parents
    }

    /// Preorder position of every operation.
    pub fn preorder_positions(&self) -> Vec<usize> {
        // preorder(v) = start(v) + depth(v)
        let starts = self.subtree_starts();
        let parents = self.parents();
        let mut depth = vec![0usize; self.ops.len()];
        for idx in (0..self.ops.len()).rev() {
            if let Some(p) = parents[idx] {
                depth[idx] = depth[p] + 1;
            }
        }
        starts.iter().zip(&depth).map(|(s, d)| s + d).collect()
    }

    /// The subexpression rooted at operation `index`.
    pub fn subexpression(&self, index: usize) -> ExprRef<'_> {
        let start = subtree_start(&self.ops, index);
        ExprRef {
            ops: &self.ops[start..=index],
        }
    }

    /// Distinct labels mentioned anywhere.
    pub fn labels(&self) -> BTreeSet<LabelId> {
        self.ops.iter().flat_map(|op| op.labels()).collect()
    }

    pub fn parse(text: &str) -> Result<Expression, ParseError> {
        parse_expression(text)
    }

    pub fn render(&self) -> String {
        render_expression(self)
    }
}

pub(crate) fn subtree_starts(ops: &[Op]) -> Vec<usize> {
    let mut starts = vec![0usize; ops.len()];
    let mut stack: Vec<usize> = Vec::new();
    for (idx, op) in ops.iter().enumerate() {
        let mut start = idx;
        for _ in 0..op.arity() {
            start = stack.pop().expect("validated expression");
        }
        starts[idx] = start;
        stack.push(start);
    }
    starts
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl std::str::FromStr for Expression {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expression(s)
    }
}

/// Counters gathered in one pass over an expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpressionStats {
    pub node_count: usize,
    pub distinct_labels: usize,
    pub max_label: u32,
    pub vertex_creations: u128,
    pub has_fuse: bool,
    pub has_multi_verts: bool,
}

pub fn expression_stats(e: &Expression) -> ExpressionStats {
    let mut labels = BTreeSet::new();
    let mut vertex_creations = 0u128;
    let mut has_fuse = false;
    let mut has_multi_verts = false;
    for op in e.ops() {
        labels.extend(op.labels());
        match *op {
            Op::Verts { count, .. } => {
                vertex_creations += u128::from(count);
                has_multi_verts |= count > 1;
            }
            Op::Fuse { .. } => has_fuse = true,
            _ => {}
        }
    }
    ExpressionStats {
        node_count: e.len(),
        distinct_labels: labels.len(),
        max_label: labels.iter().next_back().map_or(0, |l| l.get()),
        vertex_creations,
        has_fuse,
        has_multi_verts,
    }
}

/// Number of distinct labels used by the expression (not the largest index).
pub fn expression_width(e: &Expression) -> usize {
    e.labels().len()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A fuse operation, forbidden in clique-width form.
    FusePresent { index: usize },
    /// A vertex atom creating more than one vertex.
    MultiVerts { index: usize, count: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FusePresent { index } => write!(f, "fuse operation at node {index}"),
            Violation::MultiVerts { index, count } => {
                write!(f, "vertex atom at node {index} creates {count} vertices")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks an expression. Structural invariants are enforced on
/// construction, so a fusion-form check always passes; clique-width form
/// additionally forbids fuses and multi-vertex atoms.
pub fn validate_expression(e: &Expression, require_clique_width_form: bool) -> ValidationReport {
    let mut violations = Vec::new();
    if require_clique_width_form {
        for (index, op) in e.ops().iter().enumerate() {
            match *op {
                Op::Fuse { .. } => violations.push(Violation::FusePresent { index }),
                Op::Verts { count, .. } if count > 1 => {
                    violations.push(Violation::MultiVerts { index, count })
                }
                _ => {}
            }
        }
    }
    ValidationReport { violations }
}
