use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::expr::{validate_expression, Expression, LabelId, Op};
use crate::graph::{
    derive_certificate, evaluate, AtomSource, ConversionCertificate, CreationId, Engine, Observer, VertexId,
};
use crate::isp::LabelSet;

/// A label of the output expression: the label the vertex carries in the
/// input, and the labels of not-yet-created merged vertices it still has
/// to be joined with.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CompositeLabel {
    pub own: LabelId,
    pub pending: LabelSet,
}

impl fmt::Debug for CompositeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:?})", self.own, self.pending)
    }
}

/// One merged vertex of the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanEntry {
    /// The merged vertex in the input graph.
    pub vertex: VertexId,
    /// Its label right after its last merge.
    pub terminal: LabelId,
    /// Postorder index of the fuse performing the last merge.
    pub last_merge: usize,
    /// Every fuse that merges copies of this vertex, ascending.
    pub merges: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MergePlan {
    pub entries: Vec<PlanEntry>,
    /// Fuses that merge fewer than two vertices.
    pub idle_fuses: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CwConversion {
    pub expression: Expression,
    pub certificate: ConversionCertificate,
    pub plan: MergePlan,
    /// Composite behind output label `k + 1`; empty when the input was
    /// already in clique-width form and returned unchanged.
    pub composites: Vec<CompositeLabel>,
}

/// Converts a fusion-tree expression of width `k` into a clique-width
/// expression of width at most `k * 2^k` for the same graph.
pub fn fusion_to_cw(e: &Expression) -> (Expression, ConversionCertificate) {
    let c = fusion_to_cw_detailed(e);
    (c.expression, c.certificate)
}

#[derive(Default)]
struct MergeLog {
    parent: Vec<u32>,
    merges: Vec<(usize, u32)>,
}

impl Observer for MergeLog {
    fn on_atom(&mut self, _node: usize, _first: u32, count: u64) {
        self.parent.extend(std::iter::repeat_n(u32::MAX, count as usize));
    }

    fn on_merge(&mut self, node: usize, members: &[u32], merged: u32) {
        for &m in members {
            self.parent[m as usize] = merged;
        }
        self.parent.push(u32::MAX);
        self.merges.push((node, merged));
    }
}

#[derive(Default)]
struct Flattener {
    ids: BTreeMap<CompositeLabel, LabelId>,
    order: Vec<CompositeLabel>,
}

impl Flattener {
    fn get(&mut self, c: &CompositeLabel) -> LabelId {
        if let Some(&l) = self.ids.get(c) {
            return l;
        }
        let l = LabelId::new(self.order.len() as u32 + 1).expect("positive");
        self.ids.insert(c.clone(), l);
        self.order.push(c.clone());
        l
    }
}

struct Part {
    expr: Expression,
    sources: Vec<AtomSource>,
}

fn join_parts(a: Option<Part>, b: Option<Part>) -> Option<Part> {
    match (a, b) {
        (Some(mut a), Some(b)) => {
            a.sources.extend(b.sources);
            a.expr = Expression::union(a.expr, b.expr);
            Some(a)
        }
        (a, None) => a,
        (None, b) => b,
    }
}

/// State of one subexpression: the output built so far, the composite
/// labels of its created vertices, and for every label carried by copies
/// of a not-yet-created merged vertex, that vertex and the labels of
/// later-finishing merged vertices it must be joined with.
#[derive(Default)]
struct Side {
    part: Option<Part>,
    real: BTreeSet<CompositeLabel>,
    virt: BTreeMap<LabelId, (VertexId, LabelSet)>,
}

impl Side {
    fn emit(&mut self, op: Op) {
        self.part.as_mut().expect("created vertices").expr.push_unary(op);
    }

    fn with_own(&self, l: LabelId) -> Vec<CompositeLabel> {
        self.real.iter().filter(|c| c.own == l).cloned().collect()
    }

    fn with_pending(&self, l: LabelId) -> Vec<CompositeLabel> {
        self.real.iter().filter(|c| c.pending.contains(l)).cloned().collect()
    }

    /// Renames real composites, emitting one relabel per changed label.
    fn rename(&mut self, flat: &mut Flattener, moves: Vec<(CompositeLabel, CompositeLabel)>) {
        for (from, to) in &moves {
            if from != to {
                let op = Op::Relabel {
                    from: flat.get(from),
                    to: flat.get(to),
                };
                self.emit(op);
            }
        }
        for (from, _) in &moves {
            self.real.remove(from);
        }
        for (_, to) in moves {
            self.real.insert(to);
        }
    }
}

pub fn fusion_to_cw_detailed(e: &Expression) -> CwConversion {
    if validate_expression(e, true).is_valid() {
        return CwConversion {
            expression: e.clone(),
            certificate: ConversionCertificate::identity(&evaluate(e)),
            plan: MergePlan::default(),
            composites: Vec::new(),
        };
    }
    let ops = e.ops();
    let mut log = MergeLog::default();
    let run = Engine::run(e, &mut log);
    let input = &run.graph;
    let pre = e.preorder_positions();

    // merged vertices and where they are completed
    let mut root = vec![0u32; log.parent.len()];
    for x in (0..root.len()).rev() {
        let p = log.parent[x];
        root[x] = if p == u32::MAX { x as u32 } else { root[p as usize] };
    }
    let vertex_of: BTreeMap<u32, VertexId> = run.final_instance.iter().map(|(&v, &i)| (i, v)).collect();
    let mut plan: BTreeMap<VertexId, PlanEntry> = BTreeMap::new();
    let mut completes: BTreeMap<usize, VertexId> = BTreeMap::new();
    let mut merge_nodes = BTreeSet::new();
    for &(node, merged) in &log.merges {
        merge_nodes.insert(node);
        let v = vertex_of[&root[merged as usize]];
        let Op::Fuse { label } = ops[node] else { unreachable!("merges happen at fuses") };
        let entry = plan.entry(v).or_insert(PlanEntry {
            vertex: v,
            terminal: label,
            last_merge: node,
            merges: Vec::new(),
        });
        entry.merges.push(node);
        if run.final_instance[&v] == merged {
            entry.terminal = label;
            entry.last_merge = node;
            completes.insert(node, v);
        }
    }
    let finish: BTreeMap<VertexId, usize> = plan.values().map(|p| (p.vertex, p.last_merge)).collect();

    let mut flat = Flattener::default();
    let mut stack: Vec<Side> = Vec::new();
    for (idx, &op) in ops.iter().enumerate() {
        match op {
            Op::Verts { label, count } => {
                let first = CreationId {
                    atom: pre[idx] as u32,
                    offset: 0,
                };
                let owner = input.owner_of(first).expect("every creation survives");
                let mut side = Side::default();
                if finish.contains_key(&owner) {
                    side.virt.insert(label, (owner, LabelSet::empty()));
                } else {
                    let c = CompositeLabel {
                        own: label,
                        pending: LabelSet::empty(),
                    };
                    let l = flat.get(&c);
                    for k in 0..count {
                        let atom = Part {
                            expr: Expression::vert(l),
                            sources: vec![AtomSource::Creation(CreationId { offset: k, ..first })],
                        };
                        side.part = join_parts(side.part.take(), Some(atom));
                    }
                    side.real.insert(c);
                }
                stack.push(side);
            }
            Op::Join { i, j } => {
                let side = stack.last_mut().expect("operand");
                let (vi, vj) = (side.virt.get(&i).map(|x| x.0), side.virt.get(&j).map(|x| x.0));
                match (vi, vj) {
                    (None, None) => {
                        let (a, b) = (side.with_own(i), side.with_own(j));
                        for x in &a {
                            for y in &b {
                                let op = Op::Join {
                                    i: flat.get(x),
                                    j: flat.get(y),
                                };
                                side.emit(op);
                            }
                        }
                    }
                    (Some(_), None) | (None, Some(_)) => {
                        let (mark, real) = if vi.is_some() { (i, j) } else { (j, i) };
                        let moves = side
                            .with_own(real)
                            .into_iter()
                            .map(|c| {
                                let mut to = c.clone();
                                to.pending.insert(mark);
                                (c, to)
                            })
                            .collect();
                        side.rename(&mut flat, moves);
                    }
                    (Some(v), Some(u)) => {
                        if v != u {
                            // the vertex completed first carries the edge
                            let (holder, other) = if finish[&v] < finish[&u] { (i, j) } else { (j, i) };
                            side.virt.get_mut(&holder).expect("virtual").1.insert(other);
                        }
                    }
                }
            }
            Op::Relabel { from, to } => {
                if from == to {
                    continue;
                }
                let side = stack.last_mut().expect("operand");
                if let Some((v, pending)) = side.virt.remove(&from) {
                    match side.virt.get_mut(&to) {
                        Some(existing) => {
                            debug_assert_eq!(existing.0, v);
                            existing.1 = existing.1.union(&pending);
                        }
                        None => {
                            side.virt.insert(to, (v, pending));
                        }
                    }
                    let rename = |s: &LabelSet| -> LabelSet {
                        let mut t = s.clone();
                        if t.remove(from) {
                            t.insert(to);
                        }
                        t
                    };
                    for entry in side.virt.values_mut() {
                        entry.1 = rename(&entry.1);
                    }
                    let moves = side
                        .with_pending(from)
                        .into_iter()
                        .map(|c| {
                            let to = CompositeLabel {
                                own: c.own,
                                pending: rename(&c.pending),
                            };
                            (c, to)
                        })
                        .collect();
                    side.rename(&mut flat, moves);
                } else {
                    debug_assert!(side.with_own(from).is_empty() || !side.virt.contains_key(&to));
                    let moves = side
                        .with_own(from)
                        .into_iter()
                        .map(|c| {
                            let to = CompositeLabel {
                                own: to,
                                pending: c.pending.clone(),
                            };
                            (c, to)
                        })
                        .collect();
                    side.rename(&mut flat, moves);
                }
            }
            Op::Fuse { label } => {
                let Some(&v) = completes.get(&idx) else { continue };
                let side = stack.last_mut().expect("operand");
                let (owner, pending) = side.virt.remove(&label).expect("merged copies are virtual");
                debug_assert_eq!(owner, v);
                debug_assert!(side.virt.values().all(|(_, p)| !p.contains(label)));
                let created = CompositeLabel { own: label, pending };
                let l = flat.get(&created);
                let atom = Part {
                    expr: Expression::vert(l),
                    sources: vec![AtomSource::Vertex(v)],
                };
                side.part = join_parts(side.part.take(), Some(atom));
                let waiting = side.with_pending(label);
                side.real.insert(created);
                for c in &waiting {
                    let op = Op::Join { i: flat.get(c), j: l };
                    side.emit(op);
                }
                let moves = waiting
                    .into_iter()
                    .map(|c| {
                        let mut to = c.clone();
                        to.pending.remove(label);
                        (c, to)
                    })
                    .collect();
                side.rename(&mut flat, moves);
            }
            Op::Union => {
                let right = stack.pop().expect("operand");
                let left = stack.last_mut().expect("operand");
                left.part = join_parts(left.part.take(), right.part);
                left.real.extend(right.real);
                for (l, (v, p)) in right.virt {
                    match left.virt.get_mut(&l) {
                        Some(existing) => {
                            debug_assert_eq!(existing.0, v);
                            existing.1 = existing.1.union(&p);
                        }
                        None => {
                            left.virt.insert(l, (v, p));
                        }
                    }
                }
            }
        }
    }
    let side = stack.pop().expect("nonempty expression");
    debug_assert!(side.virt.is_empty());
    let part = side.part.expect("graphs are nonempty");
    let sources: BTreeMap<usize, AtomSource> = part
        .expr
        .ops()
        .iter()
        .enumerate()
        .filter(|(_, op)| matches!(op, Op::Verts { .. }))
        .map(|(i, _)| i)
        .zip(part.sources)
        .collect();
    let output = evaluate(&part.expr);
    let certificate =
        derive_certificate(input, &part.expr, &output, &sources).expect("conversion keeps every vertex");
    let idle_fuses = ops
        .iter()
        .enumerate()
        .filter(|(i, op)| matches!(op, Op::Fuse { .. }) && !merge_nodes.contains(i))
        .map(|(i, _)| i)
        .collect();
    CwConversion {
        expression: part.expr,
        certificate,
        plan: MergePlan {
            entries: plan.into_values().collect(),
            idle_fuses,
        },
        composites: flat.order,
    }
}
