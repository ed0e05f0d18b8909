use std::collections::HashMap;

use num_bigint::BigUint;

use super::poly::{LabelSet, LabeledPolynomial};
use super::IspError;
use crate::expr::LabelId;
use crate::graph::{LabeledGraph, VertexId};

/// Default vertex limit for exhaustive enumeration.
pub const DEFAULT_ORACLE_LIMIT: usize = 25;

const HARD_LIMIT: usize = 30;
const DENSE_LABELS: usize = 10;

struct Prepared {
    n: usize,
    adj: Vec<u32>,
    label_bit: Vec<u32>,
    labels: Vec<LabelId>,
}

fn prepare(g: &LabeledGraph, limit: usize) -> Result<Prepared, IspError> {
    let n = g.vertex_count();
    let limit = limit.min(HARD_LIMIT);
    if n > limit {
        return Err(IspError::TooLarge { n, limit });
    }
    let ids: Vec<VertexId> = g.vertex_ids().collect();
    let mut labels: Vec<LabelId> = g.vertices().map(|(_, i)| i.label).collect();
    labels.sort_unstable();
    labels.dedup();
    let index = |v: VertexId| ids.binary_search(&v).expect("vertex");
    let mut adj = vec![0u32; n];
    for (u, v) in g.edges() {
        let (a, b) = (index(u), index(v));
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    let label_bit = g
        .vertices()
        .map(|(_, i)| 1u32 << labels.binary_search(&i.label).expect("label"))
        .collect();
    Ok(Prepared {
        n,
        adj,
        label_bit,
        labels,
    })
}

/// Counts of independent sets keyed by (size, label mask).
enum Tally {
    Dense(Vec<u64>),
    Sparse(HashMap<(u32, u32), u64>),
}

impl Tally {
    fn new(n: usize, label_count: usize) -> Tally {
        if label_count <= DENSE_LABELS {
            Tally::Dense(vec![0; (n + 1) << label_count])
        } else {
            Tally::Sparse(HashMap::new())
        }
    }

    #[inline]
    fn add(&mut self, size: u32, mask: u32, label_count: usize) {
        match self {
            Tally::Dense(v) => v[((size as usize) << label_count) | mask as usize] += 1,
            Tally::Sparse(m) => *m.entry((size, mask)).or_insert(0) += 1,
        }
    }

    fn entries(self, label_count: usize) -> Vec<((u32, u32), u64)> {
        match self {
            Tally::Dense(v) => v
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .map(|(k, c)| (((k >> label_count) as u32, (k & ((1 << label_count) - 1)) as u32), c))
                .collect(),
            Tally::Sparse(m) => m.into_iter().collect(),
        }
    }
}

#[derive(Clone, Copy)]
struct Branch {
    candidates: u32,
    size: u32,
    mask: u32,
}

fn enumerate(p: &Prepared, start: Branch, tally: &mut Tally) {
    let k = p.labels.len();
    let mut stack = vec![start];
    while let Some(b) = stack.pop() {
        if b.candidates == 0 {
            tally.add(b.size, b.mask, k);
            continue;
        }
        let v = b.candidates.trailing_zeros() as usize;
        let rest = b.candidates & !(1 << v);
        stack.push(Branch {
            candidates: rest,
            ..b
        });
        stack.push(Branch {
            candidates: rest & !p.adj[v],
            size: b.size + 1,
            mask: b.mask | p.label_bit[v],
        });
    }
}

/// Expands the search tree breadth-first into roughly `target` disjoint
/// subproblems.
fn split(p: &Prepared, target: usize) -> Vec<Branch> {
    let full = if p.n == 32 { u32::MAX } else { (1u32 << p.n) - 1 };
    let mut frontier = vec![Branch {
        candidates: full,
        size: 0,
        mask: 0,
    }];
    while frontier.len() < target && frontier.iter().any(|b| b.candidates != 0) {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for b in frontier {
            if b.candidates == 0 {
                next.push(b);
                continue;
            }
            let v = b.candidates.trailing_zeros() as usize;
            let rest = b.candidates & !(1 << v);
            next.push(Branch {
                candidates: rest,
                ..b
            });
            next.push(Branch {
                candidates: rest & !p.adj[v],
                size: b.size + 1,
                mask: b.mask | p.label_bit[v],
            });
        }
        frontier = next;
    }
    frontier
}

fn assemble(p: &Prepared, entries: Vec<((u32, u32), u64)>) -> LabeledPolynomial {
    LabeledPolynomial::from_terms(entries.into_iter().map(|((size, mask), c)| {
        let set: LabelSet = (0..p.labels.len())
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| p.labels[b])
            .collect();
        (size, set, BigUint::from(c))
    }))
    .expect("enumerated sets are consistent")
}

fn merge_entries(mut a: Vec<((u32, u32), u64)>, b: Vec<((u32, u32), u64)>) -> Vec<((u32, u32), u64)> {
    a.extend(b);
    a
}

/// Counts independent sets of `g` by size and label set, by enumeration.
/// Subtrees of the search are distributed over threads when the crate is
/// built with the `parallel` feature.
pub fn brute_force_labeled_isp(g: &LabeledGraph, limit: usize) -> Result<LabeledPolynomial, IspError> {
    let p = prepare(g, limit)?;
    if p.n < 12 || !crate::par::is_parallel() {
        return brute_force_labeled_isp_sequential(g, limit);
    }
    let tasks = split(&p, 256);
    let k = p.labels.len();
    let entries = crate::par::map_reduce(
        tasks.len(),
        Vec::new,
        |t| {
            let mut tally = Tally::new(p.n, k);
            enumerate(&p, tasks[t], &mut tally);
            tally.entries(k)
        },
        merge_entries,
    );
    Ok(assemble(&p, entries))
}

/// Single-threaded enumeration.
pub fn brute_force_labeled_isp_sequential(g: &LabeledGraph, limit: usize) -> Result<LabeledPolynomial, IspError> {
    let p = prepare(g, limit)?;
    let k = p.labels.len();
    let mut tally = Tally::new(p.n, k);
    for b in split(&p, 1) {
        enumerate(&p, b, &mut tally);
    }
    Ok(assemble(&p, tally.entries(k)))
}
