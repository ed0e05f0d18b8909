use std::fmt::Write;

use super::{subtree_starts, Expression, Op};

/// Canonical text: single spaces, no comments, no `vert` sugar.
pub fn render_expression(e: &Expression) -> String {
    render_ops(e.ops())
}

enum Step {
    Node(usize),
    Text(&'static str),
}

pub(super) fn render_ops(ops: &[Op]) -> String {
    let mut out = String::with_capacity(ops.len() * 12);
    if ops.is_empty() {
        return out;
    }
    let starts = subtree_starts(ops);
    let mut work = vec![Step::Node(ops.len() - 1)];
    while let Some(step) = work.pop() {
        let idx = match step {
            Step::Text(t) => {
                out.push_str(t);
                continue;
            }
            Step::Node(idx) => idx,
        };
        match ops[idx] {
            Op::Verts { label, count } => {
                let _ = write!(out, "(verts {label} {count})");
            }
            Op::Join { i, j } => {
                let _ = write!(out, "(join {i} {j} ");
                work.push(Step::Text(")"));
                work.push(Step::Node(idx - 1));
            }
            Op::Relabel { from, to } => {
                let _ = write!(out, "(ren {from} {to} ");
                work.push(Step::Text(")"));
                work.push(Step::Node(idx - 1));
            }
            Op::Fuse { label } => {
                let _ = write!(out, "(fuse {label} ");
                work.push(Step::Text(")"));
                work.push(Step::Node(idx - 1));
            }
            Op::Union => {
                out.push_str("(union ");
                let right = idx - 1;
                let left = starts[right] - 1;
                work.push(Step::Text(")"));
                work.push(Step::Node(right));
                work.push(Step::Text(" "));
                work.push(Step::Node(left));
            }
        }
    }
    out
}
