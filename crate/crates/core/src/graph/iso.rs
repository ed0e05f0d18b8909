use super::{LabeledGraph, VertexId};

pub const DEFAULT_ISO_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IsoError {
    #[error("graph has {n} vertices, exhaustive isomorphism limit is {limit}")]
    TooLarge { n: usize, limit: usize },
}

struct Dense {
    n: usize,
    adj: Vec<u64>,
    degree: Vec<u32>,
}

fn dense(g: &LabeledGraph) -> Dense {
    let ids: Vec<VertexId> = g.vertex_ids().collect();
    let index = |v: VertexId| ids.binary_search(&v).unwrap();
    let mut adj = vec![0u64; ids.len()];
    for (u, v) in g.edges() {
        let (a, b) = (index(u), index(v));
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    let degree = adj.iter().map(|m| m.count_ones()).collect();
    Dense {
        n: ids.len(),
        adj,
        degree,
    }
}

/// Exhaustive isomorphism test for small graphs (labels ignored), with
/// degree-sequence pruning.
pub fn isomorphic_small(g1: &LabeledGraph, g2: &LabeledGraph, limit: usize) -> Result<bool, IsoError> {
    let limit = limit.min(64);
    for g in [g1, g2] {
        if g.vertex_count() > limit {
            return Err(IsoError::TooLarge {
                n: g.vertex_count(),
                limit,
            });
        }
    }
    if g1.vertex_count() != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return Ok(false);
    }
    let a = dense(g1);
    let b = dense(g2);
    let mut da = a.degree.clone();
    let mut db = b.degree.clone();
    da.sort_unstable();
    db.sort_unstable();
    if da != db {
        return Ok(false);
    }
    // map high-degree vertices first
    let mut order: Vec<usize> = (0..a.n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(a.degree[v]));
    let mut image = vec![usize::MAX; a.n];
    Ok(extend(&a, &b, &order, 0, &mut image, 0))
}

fn extend(a: &Dense, b: &Dense, order: &[usize], depth: usize, image: &mut [usize], used: u64) -> bool {
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    for w in 0..b.n {
        if used & (1 << w) != 0 || b.degree[w] != a.degree[v] {
            continue;
        }
        let consistent = order[..depth].iter().all(|&u| {
            let edge_a = a.adj[v] & (1 << u) != 0;
            let edge_b = b.adj[w] & (1 << image[u]) != 0;
            edge_a == edge_b
        });
        if consistent {
            image[v] = w;
            if extend(a, b, order, depth + 1, image, used | (1 << w)) {
                return true;
            }
        }
    }
    image[v] = usize::MAX;
    false
}
