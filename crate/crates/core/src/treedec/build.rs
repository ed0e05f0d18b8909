use std::collections::{BTreeMap, BTreeSet};

use super::{validate_td, HostGraph, NodeId, TdError, TreeDecomposition};
use crate::expr::{Expression, LabelId, Op};
use crate::graph::{evaluate, ConversionCertificate, VertexId};

/// Constant `c` of the output size bound
/// `node_count <= c * (|V| + |E| + bags)` for a decomposition of width `w`.
///
/// Each bag contributes at most `w + 1` atoms, `w + 1` fuses and one
/// union per part; relabels are bounded by `|V|` and joins by `|E|`.
pub fn td_size_constant(width: usize) -> usize {
    3 * (width + 1) + 1
}

/// Result of [`td_to_fusion_detailed`].
#[derive(Clone, Debug)]
pub struct TdConversion {
    pub expression: Expression,
    pub certificate: ConversionCertificate,
    /// Label of every vertex in every bag.
    pub labels: BTreeMap<NodeId, BTreeMap<u32, LabelId>>,
    /// Bag node at which each host edge is joined.
    pub join_sites: BTreeMap<(u32, u32), NodeId>,
    /// Label given to vertices once they leave the bags.
    pub reserved: LabelId,
}

/// Builds a fusion-tree expression over at most `width + 2` labels whose
/// graph is `g`, together with the vertex certificate against
/// [`HostGraph::to_labeled_graph`].
pub fn td_to_fusion(g: &HostGraph, td: &TreeDecomposition) -> Result<(Expression, ConversionCertificate), TdError> {
    let c = td_to_fusion_detailed(g, td)?;
    Ok((c.expression, c.certificate))
}

fn label(v: usize) -> LabelId {
    LabelId::new(v as u32).expect("positive label")
}

/// A partial expression and the host vertex behind each of its atoms, in
/// postorder.
struct Part {
    expr: Expression,
    atoms: Vec<u32>,
}

fn union(mut a: Part, b: Part) -> Part {
    a.atoms.extend(b.atoms);
    a.expr = Expression::union(a.expr, b.expr);
    a
}

pub fn td_to_fusion_detailed(g: &HostGraph, td: &TreeDecomposition) -> Result<TdConversion, TdError> {
    let report = validate_td(g, td);
    if !report.is_valid() {
        return Err(TdError::Invalid(report));
    }
    if g.vertex_count() == 0 {
        return Err(TdError::EmptyGraph);
    }
    let k = td.width();
    let reserved = label(k + 2);
    let root = *td.bags().keys().next().expect("vertices imply bags");
    let order = td.bfs_order(root);
    let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    let mut depth: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut top: BTreeMap<u32, NodeId> = BTreeMap::new();

    // labels top down: shared vertices keep the parent's label, new ones
    // take the lowest free regular label
    let mut labels: BTreeMap<NodeId, BTreeMap<u32, LabelId>> = BTreeMap::new();
    for &(t, parent) in &order {
        let bag = &td.bags()[&t];
        let mut lab: BTreeMap<u32, LabelId> = BTreeMap::new();
        if let Some(p) = parent {
            children.entry(p).or_default().push(t);
            depth.insert(t, depth[&p] + 1);
            for &v in bag {
                if let Some(&l) = labels[&p].get(&v) {
                    lab.insert(v, l);
                }
            }
        } else {
            depth.insert(t, 0);
        }
        let used: BTreeSet<LabelId> = lab.values().copied().collect();
        let mut free = (1..=k + 1).map(label).filter(|l| !used.contains(l));
        for &v in bag {
            if !lab.contains_key(&v) {
                lab.insert(v, free.next().expect("bag fits in k + 1 labels"));
                top.insert(v, t);
            }
        }
        labels.insert(t, lab);
    }

    let mut emit_at: BTreeMap<NodeId, Vec<(u32, u32)>> = BTreeMap::new();
    let mut join_sites = BTreeMap::new();
    for (u, v) in g.edges() {
        let (tu, tv) = (top[&u], top[&v]);
        let site = if depth[&tu] >= depth[&tv] { tu } else { tv };
        emit_at.entry(site).or_default().push((u, v));
        join_sites.insert((u, v), site);
    }

    let mut built: BTreeMap<NodeId, Option<Part>> = BTreeMap::new();
    for &(t, _) in order.iter().rev() {
        let bag = &td.bags()[&t];
        let lab = &labels[&t];
        let mut parts: Vec<Part> = Vec::new();
        let mut occurrences: BTreeMap<u32, usize> = BTreeMap::new();
        for c in children.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
            let child_bag = &td.bags()[c];
            for v in child_bag.intersection(bag) {
                *occurrences.entry(*v).or_insert(0) += 1;
            }
            let Some(mut part) = built.remove(c).flatten() else {
                continue;
            };
            for v in child_bag.difference(bag) {
                part.expr.push_unary(Op::Relabel {
                    from: labels[c][v],
                    to: reserved,
                });
            }
            parts.push(part);
        }
        for &v in bag {
            if !occurrences.contains_key(&v) {
                parts.push(Part {
                    expr: Expression::vert(lab[&v]),
                    atoms: vec![v],
                });
            }
        }
        let mut part = parts.into_iter().reduce(union);
        if let Some(p) = part.as_mut() {
            for (v, &n) in &occurrences {
                if n >= 2 {
                    p.expr.push_unary(Op::Fuse { label: lab[v] });
                }
            }
            for &(u, v) in emit_at.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
                p.expr.push_unary(Op::Join { i: lab[&u], j: lab[&v] });
            }
        }
        built.insert(t, part);
    }
    let part = built.remove(&root).flatten().expect("nonempty graph");

    let output = evaluate(&part.expr);
    // every output vertex is a merge of atoms of a single host vertex
    let preorder = part.expr.preorder_positions();
    let mut by_preorder: BTreeMap<u32, u32> = BTreeMap::new();
    let mut k_atom = 0;
    for (idx, op) in part.expr.ops().iter().enumerate() {
        if let Op::Verts { .. } = op {
            by_preorder.insert(preorder[idx] as u32, part.atoms[k_atom]);
            k_atom += 1;
        }
    }
    let mut certificate = ConversionCertificate::new();
    for (v, info) in output.vertices() {
        let c = info.provenance.iter().next().expect("nonempty provenance");
        certificate.insert(v, VertexId(by_preorder[&c.atom]));
    }
    Ok(TdConversion {
        expression: part.expr,
        certificate,
        labels,
        join_sites,
        reserved,
    })
}
