use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{CreationId, LabeledGraph, VertexId};
use crate::expr::{expression_stats, Expression, LabelId, Op};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("expression creates {creations} vertices, limit is {limit}")]
    TooLarge { creations: u128, limit: u128 },
}

/// Hooks into the evaluation engine. Instance ids are dense indices of
/// every vertex that ever existed during evaluation; a merge retires its
/// members and introduces a fresh instance.
pub(crate) trait Observer {
    fn on_atom(&mut self, _node: usize, _first_instance: u32, _count: u64) {}
    fn on_join(&mut self, _node: usize, _u: u32, _v: u32) {}
    fn on_merge(&mut self, _node: usize, _members: &[u32], _merged: u32) {}
}

impl Observer for () {}

struct Instance {
    creations: Vec<u32>,
    adj: Vec<u32>,
}

/// Label classes of one subexpression's graph.
#[derive(Default)]
struct Part {
    classes: BTreeMap<LabelId, Vec<u32>>,
}

fn append_small_to_large(into: &mut Vec<u32>, mut other: Vec<u32>) {
    if other.len() > into.len() {
        std::mem::swap(into, &mut other);
    }
    into.extend_from_slice(&other);
}

pub(crate) struct Engine {
    instances: Vec<Instance>,
    edges: HashSet<(u32, u32)>,
    /// (first creation index, atom postorder index) per atom, ascending
    atoms: Vec<(u32, usize)>,
    next_creation: u32,
}

/// Result of running the engine.
pub(crate) struct Run {
    pub graph: LabeledGraph,
    /// instance id of every final vertex
    pub final_instance: BTreeMap<VertexId, u32>,
}

impl Engine {
    pub fn run<O: Observer>(e: &Expression, obs: &mut O) -> Run {
        let mut eng = Engine {
            instances: Vec::new(),
            edges: HashSet::new(),
            atoms: Vec::new(),
            next_creation: 0,
        };
        let mut stack: Vec<Part> = Vec::new();
        for (idx, op) in e.ops().iter().enumerate() {
            match *op {
                Op::Verts { label, count } => {
                    let first = eng.instances.len() as u32;
                    eng.atoms.push((eng.next_creation, idx));
                    let mut ids = Vec::with_capacity(count as usize);
                    for _ in 0..count {
                        ids.push(eng.instances.len() as u32);
                        eng.instances.push(Instance {
                            creations: vec![eng.next_creation],
                            adj: Vec::new(),
                        });
                        eng.next_creation += 1;
                    }
                    obs.on_atom(idx, first, count);
                    let mut part = Part::default();
                    part.classes.insert(label, ids);
                    stack.push(part);
                }
                Op::Join { i, j } => {
                    let part = stack.last().expect("operand");
                    let (Some(left), Some(right)) = (part.classes.get(&i), part.classes.get(&j)) else {
                        continue;
                    };
                    for &u in left {
                        for &v in right {
                            let key = (u.min(v), u.max(v));
                            if eng.edges.insert(key) {
                                eng.instances[u as usize].adj.push(v);
                                eng.instances[v as usize].adj.push(u);
                            }
                            obs.on_join(idx, u, v);
                        }
                    }
                }
                Op::Relabel { from, to } => {
                    if from == to {
                        continue;
                    }
                    let part = stack.last_mut().expect("operand");
                    if let Some(moved) = part.classes.remove(&from) {
                        append_small_to_large(part.classes.entry(to).or_default(), moved);
                    }
                }
                Op::Fuse { label } => {
                    let part = stack.last_mut().expect("operand");
                    let Some(members) = part.classes.get_mut(&label) else {
                        continue;
                    };
                    if members.len() < 2 {
                        continue;
                    }
                    let members = std::mem::take(members);
                    let merged = eng.merge(&members);
                    obs.on_merge(idx, &members, merged);
                    part.classes.insert(label, vec![merged]);
                }
                Op::Union => {
                    let right = stack.pop().expect("operand");
                    let left = stack.last_mut().expect("operand");
                    let (mut big, small) = if right.classes.len() > left.classes.len() {
                        (right, std::mem::take(left))
                    } else {
                        (std::mem::take(left), right)
                    };
                    for (label, ids) in small.classes {
                        append_small_to_large(big.classes.entry(label).or_default(), ids);
                    }
                    *left = big;
                }
            }
        }
        let part = stack.pop().expect("nonempty expression");
        debug_assert!(stack.is_empty());
        eng.finish(e, part)
    }

    fn merge(&mut self, members: &[u32]) -> u32 {
        let merged_set: HashSet<u32> = members.iter().copied().collect();
        let new_id = self.instances.len() as u32;
        let mut creations = Vec::new();
        let mut outside: BTreeSet<u32> = BTreeSet::new();
        for &m in members {
            let inst = &mut self.instances[m as usize];
            let adj = std::mem::take(&mut inst.adj);
            let mut cr = std::mem::take(&mut inst.creations);
            if cr.len() > creations.len() {
                std::mem::swap(&mut cr, &mut creations);
            }
            creations.extend_from_slice(&cr);
            for nb in adj {
                self.edges.remove(&(m.min(nb), m.max(nb)));
                if merged_set.contains(&nb) {
                    continue;
                }
                let nadj = &mut self.instances[nb as usize].adj;
                if let Some(pos) = nadj.iter().position(|&x| x == m) {
                    nadj.swap_remove(pos);
                }
                outside.insert(nb);
            }
        }
        for &nb in &outside {
            self.edges.insert((nb.min(new_id), nb.max(new_id)));
            self.instances[nb as usize].adj.push(new_id);
        }
        self.instances.push(Instance {
            creations,
            adj: outside.into_iter().collect(),
        });
        new_id
    }

    fn creation_id(&self, c: u32, preorder: &[usize]) -> CreationId {
        let pos = self.atoms.partition_point(|&(first, _)| first <= c) - 1;
        let (first, node) = self.atoms[pos];
        CreationId {
            atom: preorder[node] as u32,
            offset: u64::from(c - first),
        }
    }

    fn finish(self, e: &Expression, part: Part) -> Run {
        let preorder = e.preorder_positions();
        let mut graph = LabeledGraph::new();
        let mut final_instance = BTreeMap::new();
        let mut vid = BTreeMap::new();
        for (label, ids) in &part.classes {
            for &inst in ids {
                let creations = &self.instances[inst as usize].creations;
                let id = VertexId(*creations.iter().min().expect("nonempty"));
                let provenance: BTreeSet<CreationId> =
                    creations.iter().map(|&c| self.creation_id(c, &preorder)).collect();
                graph.add_vertex(id, *label, provenance).expect("disjoint provenance");
                final_instance.insert(id, inst);
                vid.insert(inst, id);
            }
        }
        for &(u, v) in &self.edges {
            graph.add_edge(vid[&u], vid[&v]).expect("live endpoints");
        }
        Run { graph, final_instance }
    }
}

/// Default cap on created vertices for [`evaluate`].
const MAX_CREATIONS: u128 = u32::MAX as u128 / 2;

/// Evaluates an expression to its labeled graph.
///
/// Vertex ids are assigned deterministically by creation order, so equal
/// expressions evaluate to equal graphs.
///
/// # Panics
/// If the expression creates more than 2^31 vertices; use
/// [`try_evaluate`] to bound the work explicitly.
pub fn evaluate(e: &Expression) -> LabeledGraph {
    try_evaluate(e, MAX_CREATIONS).expect("expression too large to evaluate")
}

pub fn try_evaluate(e: &Expression, max_creations: u128) -> Result<LabeledGraph, EvalError> {
    let creations = expression_stats(e).vertex_creations;
    let limit = max_creations.min(MAX_CREATIONS);
    if creations > limit {
        return Err(EvalError::TooLarge { creations, limit });
    }
    Ok(Engine::run(e, &mut ()).graph)
}
