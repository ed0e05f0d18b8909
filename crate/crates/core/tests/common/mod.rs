#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use fusion_width::expr::{Expression, LabelId, Op};
use fusion_width::graph::{evaluate, LabeledGraph, VertexId};
use fusion_width::isp::{LabeledPolynomial, UnivariatePolynomial};
use fusion_width::treedec::{HostGraph, TreeDecomposition};
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn l(v: u32) -> LabelId {
    LabelId::new(v).unwrap()
}

pub fn parse(text: &str) -> Expression {
    text.parse().unwrap()
}

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    /// Labels are drawn from `1..=k`.
    pub k: u32,
    /// Upper bound on vertex creations.
    pub max_creations: u64,
    pub fuses: bool,
    /// Largest count of a single atom.
    pub max_count: u64,
}

impl GenConfig {
    pub fn fusion(k: u32, max_creations: u64) -> Self {
        GenConfig {
            k,
            max_creations,
            fuses: true,
            max_count: 3,
        }
    }

    pub fn clique_width(k: u32, max_creations: u64) -> Self {
        GenConfig {
            k,
            max_creations,
            fuses: false,
            max_count: 1,
        }
    }
}

fn pick_label(rng: &mut ChaCha8Rng, k: u32, present: &BTreeSet<LabelId>) -> LabelId {
    if !present.is_empty() && rng.gen_bool(0.8) {
        let v: Vec<LabelId> = present.iter().copied().collect();
        *v.choose(rng).unwrap()
    } else {
        l(rng.gen_range(1..=k))
    }
}

fn gen_rec(rng: &mut ChaCha8Rng, cfg: &GenConfig, budget: u64) -> Expression {
    let mut e = if budget <= 1 || rng.gen_bool(0.25) {
        let count = rng.gen_range(1..=budget.clamp(1, cfg.max_count));
        Expression::verts(l(rng.gen_range(1..=cfg.k)), count)
    } else {
        let left = rng.gen_range(1..budget);
        let a = gen_rec(rng, cfg, left);
        let b = gen_rec(rng, cfg, budget - left);
        Expression::union(a, b)
    };
    let present = e.labels();
    for _ in 0..rng.gen_range(0..4) {
        let roll = rng.gen_range(0..10);
        if roll < 5 && cfg.k >= 2 {
            let i = pick_label(rng, cfg.k, &present);
            let j = pick_label(rng, cfg.k, &present);
            if i != j {
                e = e.join(i, j);
            }
        } else if roll < 7 || !cfg.fuses {
            let i = pick_label(rng, cfg.k, &present);
            let j = l(rng.gen_range(1..=cfg.k));
            e = e.relabel(i, j);
        } else {
            e = e.fuse(pick_label(rng, cfg.k, &present));
        }
    }
    e
}

/// True when some fuse merges two vertices that are adjacent below it.
pub fn has_adjacent_merge(e: &Expression) -> bool {
    e.ops().iter().enumerate().any(|(idx, op)| {
        let Op::Fuse { label } = *op else { return false };
        let g = evaluate(&e.subexpression(idx - 1).to_owned());
        let members = g.vertices_with_label(label);
        members
            .iter()
            .any(|&u| members.iter().any(|&v| u < v && g.has_edge(u, v)))
    })
}

/// Random expression within `cfg`; fusion expressions never merge adjacent vertices.
pub fn random_expression(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Expression {
    loop {
        let budget = rng.gen_range(1..=cfg.max_creations);
        let e = gen_rec(rng, cfg, budget);
        if !cfg.fuses || !has_adjacent_merge(&e) {
            return e;
        }
    }
}

/// Random partial k-tree on `n` vertices (1-based) with a tree decomposition of width `k`.
pub fn random_k_tree(rng: &mut ChaCha8Rng, k: u32, n: u32, keep_edge: f64) -> (HostGraph, TreeDecomposition) {
    assert!(n > k);
    let mut edges = BTreeSet::new();
    let mut bags: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    let mut tree = Vec::new();
    let first: BTreeSet<u32> = (1..=k + 1).collect();
    for &a in &first {
        for &b in &first {
            if a < b {
                edges.insert((a, b));
            }
        }
    }
    bags.insert(1, first);
    for v in k + 2..=n {
        let parent = rng.gen_range(1..=bags.len() as u32);
        let mut clique: Vec<u32> = bags[&parent].iter().copied().collect();
        clique.shuffle(rng);
        clique.truncate(k as usize);
        for &u in &clique {
            edges.insert((u.min(v), u.max(v)));
        }
        let mut bag: BTreeSet<u32> = clique.into_iter().collect();
        bag.insert(v);
        let id = bags.len() as u32 + 1;
        bags.insert(id, bag);
        tree.push((parent, id));
    }
    let kept: Vec<(u32, u32)> = edges.into_iter().filter(|_| rng.gen_bool(keep_edge)).collect();
    let g = HostGraph::new(n, kept).unwrap();
    let td = TreeDecomposition::new(n, bags, tree).unwrap();
    (g, td)
}

/// Independent sets by size and label pattern, by plain subset enumeration.
pub fn naive_labeled_counts(g: &LabeledGraph) -> BTreeMap<(u32, Vec<u32>), u64> {
    let ids: Vec<VertexId> = g.vertex_ids().collect();
    let n = ids.len();
    assert!(n <= 20);
    let mut out = BTreeMap::new();
    for mask in 0u32..(1 << n) {
        let set: Vec<VertexId> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ids[i]).collect();
        let independent = set
            .iter()
            .all(|&u| set.iter().all(|&v| u == v || !g.has_edge(u, v)));
        if independent {
            let labels: BTreeSet<u32> = set.iter().map(|&v| g.label(v).unwrap().get()).collect();
            *out.entry((set.len() as u32, labels.into_iter().collect())).or_insert(0) += 1;
        }
    }
    out
}

pub fn labeled_counts(p: &LabeledPolynomial) -> BTreeMap<(u32, Vec<u32>), u64> {
    p.terms()
        .into_iter()
        .map(|(d, s, c)| {
            let labels = s.iter().map(|x| x.get()).collect();
            (
                (d, labels),
                u64::try_from(c.clone()).expect("small coefficient"),
            )
        })
        .collect()
}

/// Independent sets by size, counted with bitmask adjacency.
pub fn naive_univariate(g: &LabeledGraph) -> Vec<u64> {
    let ids: Vec<VertexId> = g.vertex_ids().collect();
    let index: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = ids.len();
    assert!(n <= 24);
    let mut adj = vec![0u32; n];
    for (u, v) in g.edges() {
        adj[index[&u]] |= 1 << index[&v];
        adj[index[&v]] |= 1 << index[&u];
    }
    let mut counts = vec![0u64; n + 1];
    for mask in 0u32..(1 << n) {
        let ok = (0..n).all(|i| mask >> i & 1 == 0 || adj[i] & mask == 0);
        if ok {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    counts
}

pub fn univariate_vec(p: &UnivariatePolynomial, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    out[0] = 1;
    for (d, c) in p.iter() {
        out[d as usize] = u64::try_from(c.clone()).unwrap();
    }
    out
}

pub fn big(v: u64) -> BigUint {
    BigUint::from(v)
}
