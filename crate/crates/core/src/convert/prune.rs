use std::collections::{BTreeMap, BTreeSet};

use super::{atom_indices, census, certify_atom_subsequence};
use crate::expr::{Expression, LabelId, Op};
use crate::graph::{evaluate, ConversionCertificate, Engine, Observer};

/// Constant `c` of the size bound `node_count <= c * (|V| + |E|)` after
/// pruning an expression of width `k`.
///
/// Kept creations are at most `|V| + 2|E|` (one per vertex, two per edge
/// witness), effective fuses at most `2|E|`, joins at most `|E|`. Every
/// remaining node other than a relabel is one of these, a union, or the
/// relabel paired with a fuse, which gives at most `2|V| + 9|E|` of
/// them; each carries a compressed relabel run of at most `3k/2` steps.
pub fn prune_size_constant(k: usize) -> usize {
    9 * (1 + 3 * k / 2)
}

/// Removes vertices and operations that do not contribute to the graph.
///
/// The expression is localized first. A provenance-tracked evaluation
/// then selects one creation for every vertex and one join event for every
/// edge; all other atoms and joins are dropped, followed by fuses and
/// relabels that no longer act on anything and by shortening of relabel
/// runs. If the result would be larger than the input, the input is
/// returned unchanged.
pub fn prune_useless_vertices(e: &Expression) -> Expression {
    prune(e).0
}

/// [`prune_useless_vertices`] with a certificate against the input graph.
pub fn prune_useless_vertices_certified(e: &Expression) -> (Expression, ConversionCertificate) {
    let (out, kept) = prune(e);
    let cert = match kept {
        Some(kept) => certify_atom_subsequence(e, &out, &kept),
        None => ConversionCertificate::identity(&evaluate(e)),
    };
    (out, cert)
}

#[derive(Default)]
struct Tracker {
    /// atom node of every leaf instance, `usize::MAX` for merged ones
    leaf_atom: Vec<usize>,
    parent: Vec<u32>,
    /// smallest atom node below every instance
    rep: Vec<usize>,
    atoms: BTreeMap<usize, (u32, u64)>,
    joins: Vec<(usize, u32, u32)>,
}

impl Observer for Tracker {
    fn on_atom(&mut self, node: usize, first: u32, count: u64) {
        debug_assert_eq!(first as usize, self.leaf_atom.len());
        self.atoms.insert(node, (first, count));
        for _ in 0..count {
            self.leaf_atom.push(node);
            self.parent.push(u32::MAX);
            self.rep.push(node);
        }
    }

    fn on_join(&mut self, node: usize, u: u32, v: u32) {
        self.joins.push((node, u, v));
    }

    fn on_merge(&mut self, _node: usize, members: &[u32], merged: u32) {
        debug_assert_eq!(merged as usize, self.leaf_atom.len());
        let mut rep = usize::MAX;
        for &m in members {
            self.parent[m as usize] = merged;
            rep = rep.min(self.rep[m as usize]);
        }
        self.leaf_atom.push(usize::MAX);
        self.parent.push(u32::MAX);
        self.rep.push(rep);
    }
}

/// Returns the pruned expression and, unless the input was kept, the
/// input atom behind every output atom.
fn prune(e: &Expression) -> (Expression, Option<Vec<usize>>) {
    let (local, local_atoms) = {
        let l = super::localize_merges(e);
        let atoms = atom_indices(e.ops());
        (l, atoms)
    };
    let mut t = Tracker::default();
    let run = Engine::run(&local, &mut t);
    let n = t.parent.len();
    let mut root = vec![0u32; n];
    for x in (0..n).rev() {
        let p = t.parent[x];
        root[x] = if p == u32::MAX { x as u32 } else { root[p as usize] };
    }

    let mut witnesses: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();
    for (k, &(_, u, v)) in t.joins.iter().enumerate() {
        let (a, b) = (root[u as usize], root[v as usize]);
        if a != b {
            witnesses.entry((a.min(b), a.max(b))).or_default().push(k);
        }
    }

    let mut kept_atoms: BTreeSet<usize> = BTreeSet::new();
    let mut live: BTreeSet<u32> = BTreeSet::new();
    let keep = |atom: usize, kept: &mut BTreeSet<usize>, live: &mut BTreeSet<u32>| {
        if kept.insert(atom) {
            let (first, count) = t.atoms[&atom];
            for leaf in first..first + count as u32 {
                live.insert(root[leaf as usize]);
            }
        }
    };
    let mut needed_joins: BTreeSet<usize> = BTreeSet::new();
    for events in witnesses.values() {
        let cost = |k: usize| {
            let (_, u, v) = t.joins[k];
            usize::from(!kept_atoms.contains(&t.rep[u as usize])) + usize::from(!kept_atoms.contains(&t.rep[v as usize]))
        };
        let best = *events.iter().min_by_key(|&&k| (cost(k), k)).expect("edge has a witness");
        let (node, u, v) = t.joins[best];
        keep(t.rep[u as usize], &mut kept_atoms, &mut live);
        keep(t.rep[v as usize], &mut kept_atoms, &mut live);
        needed_joins.insert(node);
    }
    for &f in run.final_instance.values() {
        if !live.contains(&f) {
            keep(t.rep[f as usize], &mut kept_atoms, &mut live);
        }
    }

    // drop unkept atoms, unneeded joins and everything left empty
    let ops = local.ops();
    let mut out: Vec<Op> = Vec::with_capacity(ops.len());
    let mut kept_in: Vec<usize> = Vec::new();
    let mut nonempty: Vec<bool> = Vec::new();
    let atom_rank: BTreeMap<usize, usize> = atom_indices(ops).into_iter().enumerate().map(|(r, i)| (i, r)).collect();
    for (idx, &op) in ops.iter().enumerate() {
        match op {
            Op::Verts { .. } => {
                let k = kept_atoms.contains(&idx);
                if k {
                    out.push(op);
                    kept_in.push(local_atoms[atom_rank[&idx]]);
                }
                nonempty.push(k);
            }
            Op::Union => {
                let r = nonempty.pop().expect("operand");
                let l = nonempty.pop().expect("operand");
                if l && r {
                    out.push(op);
                }
                nonempty.push(l || r);
            }
            Op::Join { .. } => {
                if *nonempty.last().expect("operand") && needed_joins.contains(&idx) {
                    out.push(op);
                }
            }
            Op::Relabel { .. } | Op::Fuse { .. } => {
                if *nonempty.last().expect("operand") {
                    out.push(op);
                }
            }
        }
    }
    let out = drop_idle_ops(out);
    let labels = e.labels();
    let out = compress_relabel_runs(out, &labels);
    if out.len() > e.len() {
        return (e.clone(), None);
    }
    let out = Expression::from_ops(out).expect("pruning keeps the tree shape");
    (out, Some(kept_in))
}

/// Drops fuses of at most one vertex and relabels of absent labels.
fn drop_idle_ops(ops: Vec<Op>) -> Vec<Op> {
    let counts = census(&ops);
    let mut out = Vec::with_capacity(ops.len());
    for (idx, &op) in ops.iter().enumerate() {
        let below = |l: LabelId| if idx == 0 { 0 } else { counts[idx - 1].get(&l).copied().unwrap_or(0) };
        let idle = match op {
            Op::Fuse { label } => below(label) <= 1,
            Op::Relabel { from, to } => from == to || below(from) == 0,
            Op::Join { i, j } => below(i) == 0 || below(j) == 0,
            _ => false,
        };
        if !idle {
            out.push(op);
        }
    }
    out
}

/// Replaces every run of consecutive relabels by a shortest equivalent
/// run, leaving a relabel that directly feeds a fuse in place.
fn compress_relabel_runs(ops: Vec<Op>, labels: &BTreeSet<LabelId>) -> Vec<Op> {
    let counts = census(&ops);
    let mut out = Vec::with_capacity(ops.len());
    let mut idx = 0;
    while idx < ops.len() {
        let feeds_fuse = |k: usize| match (ops[k], ops.get(k + 1)) {
            (Op::Relabel { to, .. }, Some(Op::Fuse { label })) => to == *label,
            _ => false,
        };
        if !matches!(ops[idx], Op::Relabel { .. }) || feeds_fuse(idx) {
            out.push(ops[idx]);
            idx += 1;
            continue;
        }
        let start = idx;
        while idx < ops.len() && matches!(ops[idx], Op::Relabel { .. }) && !feeds_fuse(idx) {
            idx += 1;
        }
        let run = &ops[start..idx];
        let present: Vec<LabelId> = counts[start - 1].iter().filter(|(_, &c)| c > 0).map(|(&l, _)| l).collect();
        let mut dest: BTreeMap<LabelId, LabelId> = present.iter().map(|&l| (l, l)).collect();
        for op in run {
            if let Op::Relabel { from, to } = *op {
                for d in dest.values_mut() {
                    if *d == from {
                        *d = to;
                    }
                }
            }
        }
        match synthesize(&dest, labels) {
            Some(short) if short.len() < run.len() => out.extend(short),
            _ => out.extend_from_slice(run),
        }
    }
    out
}

/// A short relabel sequence moving every present label `c` to `dest[c]`.
/// A label class moves when its target is free or already final; when
/// only cycles remain, one member of a cycle parks in a label that is
/// neither present nor a destination. `None` if no such label exists.
fn synthesize(dest: &BTreeMap<LabelId, LabelId>, labels: &BTreeSet<LabelId>) -> Option<Vec<Op>> {
    let mut cur = dest.clone();
    let mut seq = Vec::new();
    loop {
        let mut progress = false;
        let pending: Vec<LabelId> = cur.iter().filter(|(c, d)| c != d).map(|(&c, _)| c).collect();
        if pending.is_empty() {
            return Some(seq);
        }
        for c in pending {
            let Some(&d) = cur.get(&c) else { continue };
            match cur.get(&d) {
                Some(&dd) if dd != d => {
                    let sibling = cur.iter().find(|&(&x, &xd)| x != c && xd == d).map(|(&x, _)| x);
                    if let Some(x) = sibling {
                        seq.push(Op::Relabel { from: c, to: x });
                        cur.remove(&c);
                        progress = true;
                    }
                }
                _ => {
                    seq.push(Op::Relabel { from: c, to: d });
                    cur.remove(&c);
                    cur.insert(d, d);
                    progress = true;
                }
            }
        }
        if !progress {
            let c = *cur.iter().find(|(c, d)| c != d).expect("pending label").0;
            let image: BTreeSet<LabelId> = cur.values().copied().collect();
            let temp = labels.iter().copied().find(|l| !cur.contains_key(l) && !image.contains(l))?;
            seq.push(Op::Relabel { from: c, to: temp });
            let d = cur.remove(&c).expect("pending");
            cur.insert(temp, d);
        }
    }
}
