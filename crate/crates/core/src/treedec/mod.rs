//! Host graphs and tree decompositions in PACE 2017 format, and the
//! construction of fusion-tree expressions from decompositions.

mod build;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Write};

use crate::expr::LabelId;
use crate::graph::{CreationId, LabeledGraph, VertexId};

pub use build::{td_to_fusion, td_to_fusion_detailed, TdConversion, td_size_constant};

pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TdError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: u32 },
    #[error("line {line}: vertex {vertex} is outside 1..{n}")]
    OutOfRange { line: usize, vertex: u32, n: u32 },
    #[error("header announces {expected} {what}, found {found}")]
    CountMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("header claims bags of size up to {header}, largest bag has {actual}")]
    WidthMismatch { header: usize, actual: usize },
    #[error("tree edges do not form a tree: {0}")]
    NotATree(String),
    #[error("decomposition is invalid: {0}")]
    Invalid(TdReport),
    #[error("graph has no vertices")]
    EmptyGraph,
}

/// Simple undirected graph on vertices `1..=n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HostGraph {
    n: u32,
    edges: BTreeSet<(u32, u32)>,
}

impl HostGraph {
    /// Duplicate edges are collapsed.
    pub fn new(n: u32, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<HostGraph, TdError> {
        let mut g = HostGraph {
            n,
            edges: BTreeSet::new(),
        };
        for (u, v) in edges {
            g.insert(u, v, 0)?;
        }
        Ok(g)
    }

    fn insert(&mut self, u: u32, v: u32, line: usize) -> Result<(), TdError> {
        for x in [u, v] {
            if x == 0 || x > self.n {
                return Err(TdError::OutOfRange {
                    line,
                    vertex: x,
                    n: self.n,
                });
            }
        }
        if u == v {
            return Err(TdError::SelfLoop { line, vertex: u });
        }
        self.edges.insert((u.min(v), u.max(v)));
        Ok(())
    }

    pub fn vertex_count(&self) -> u32 {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// The graph as a [`LabeledGraph`]: vertex `v` becomes `VertexId(v)`
    /// with label 1, so certificates refer to the host numbering.
    pub fn to_labeled_graph(&self) -> LabeledGraph {
        let one = LabelId::new(1).expect("positive");
        let mut g = LabeledGraph::new();
        for v in 1..=self.n {
            let c = CreationId {
                atom: 0,
                offset: u64::from(v),
            };
            g.add_vertex(VertexId(v), one, [c].into()).expect("fresh vertex");
        }
        for &(u, v) in &self.edges {
            g.add_edge(VertexId(u), VertexId(v)).expect("valid edge");
        }
        g
    }

    pub fn to_gr(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p tw {} {}", self.n, self.edges.len());
        for (u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Non-comment, non-empty lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
        match tokens.first() {
            None | Some(&"c") => None,
            Some(_) => Some((k + 1, tokens)),
        }
    })
}

fn number<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T, TdError> {
    token.parse().map_err(|_| TdError::Syntax {
        line,
        message: format!("expected {what}, found `{token}`"),
    })
}

/// Parses a PACE `.gr` file: `p tw n m` followed by `m` edge lines.
pub fn parse_gr(text: &str) -> Result<HostGraph, TdError> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or(TdError::Syntax {
        line: 1,
        message: "missing `p tw n m` header".into(),
    })?;
    if header.len() != 4 || header[0] != "p" || header[1] != "tw" {
        return Err(TdError::Syntax {
            line,
            message: "expected header `p tw n m`".into(),
        });
    }
    let n: u32 = number(header[2], line, "vertex count")?;
    let m: usize = number(header[3], line, "edge count")?;
    let mut g = HostGraph {
        n,
        edges: BTreeSet::new(),
    };
    let mut found = 0;
    for (line, tokens) in lines {
        if tokens.len() != 2 {
            return Err(TdError::Syntax {
                line,
                message: "expected an edge `u v`".into(),
            });
        }
        let u = number(tokens[0], line, "vertex")?;
        let v = number(tokens[1], line, "vertex")?;
        g.insert(u, v, line)?;
        found += 1;
    }
    if found != m {
        return Err(TdError::CountMismatch {
            what: "edges",
            expected: m,
            found,
        });
    }
    Ok(g)
}

/// A tree of bags over the vertices `1..=n` of a host graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    n: u32,
    bags: BTreeMap<NodeId, BTreeSet<u32>>,
    tree_edges: BTreeSet<(NodeId, NodeId)>,
}

impl TreeDecomposition {
    /// Checks that the tree edges form a tree over the bag nodes.
    pub fn new(
        n: u32,
        bags: BTreeMap<NodeId, BTreeSet<u32>>,
        tree_edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<TreeDecomposition, TdError> {
        let mut edges = BTreeSet::new();
        for (a, b) in tree_edges {
            if a == b {
                return Err(TdError::NotATree(format!("loop at node {a}")));
            }
            for x in [a, b] {
                if !bags.contains_key(&x) {
                    return Err(TdError::NotATree(format!("edge mentions unknown node {x}")));
                }
            }
            if !edges.insert((a.min(b), a.max(b))) {
                return Err(TdError::NotATree(format!("edge {a} {b} listed twice")));
            }
        }
        let td = TreeDecomposition {
            n,
            bags,
            tree_edges: edges,
        };
        if !td.bags.is_empty() {
            if td.tree_edges.len() + 1 != td.bags.len() {
                return Err(TdError::NotATree(format!(
                    "{} nodes need {} edges, found {}",
                    td.bags.len(),
                    td.bags.len() - 1,
                    td.tree_edges.len()
                )));
            }
            let root = *td.bags.keys().next().expect("nonempty");
            let reached = td.bfs_order(root).len();
            if reached != td.bags.len() {
                return Err(TdError::NotATree(format!(
                    "only {reached} of {} nodes are connected to node {root}",
                    td.bags.len()
                )));
            }
        }
        Ok(td)
    }

    pub fn vertex_count(&self) -> u32 {
        self.n
    }

    pub fn bags(&self) -> &BTreeMap<NodeId, BTreeSet<u32>> {
        &self.bags
    }

    pub fn bag(&self, node: NodeId) -> Option<&BTreeSet<u32>> {
        self.bags.get(&node)
    }

    pub fn tree_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.tree_edges.iter().copied()
    }

    pub fn node_count(&self) -> usize {
        self.bags.len()
    }

    /// Largest bag size minus one (0 when every bag is empty).
    pub fn width(&self) -> usize {
        self.bags.values().map(BTreeSet::len).max().unwrap_or(0).saturating_sub(1)
    }

    pub(crate) fn neighbours(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut adj: BTreeMap<NodeId, Vec<NodeId>> = self.bags.keys().map(|&k| (k, Vec::new())).collect();
        for &(a, b) in &self.tree_edges {
            adj.get_mut(&a).expect("known node").push(b);
            adj.get_mut(&b).expect("known node").push(a);
        }
        for list in adj.values_mut() {
            list.sort_unstable();
        }
        adj
    }

    /// Nodes reachable from `root`, breadth first with ascending
    /// neighbours, paired with their parent.
    pub(crate) fn bfs_order(&self, root: NodeId) -> Vec<(NodeId, Option<NodeId>)> {
        let adj = self.neighbours();
        let mut seen = BTreeSet::from([root]);
        let mut order = Vec::new();
        let mut queue = VecDeque::from([(root, None)]);
        while let Some((t, parent)) = queue.pop_front() {
            order.push((t, parent));
            for &c in &adj[&t] {
                if seen.insert(c) {
                    queue.push_back((c, Some(t)));
                }
            }
        }
        order
    }

    pub fn to_td(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "s td {} {} {}", self.bags.len(), self.width() + 1, self.n);
        for (id, bag) in &self.bags {
            let _ = write!(out, "b {id}");
            for v in bag {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        for (a, b) in &self.tree_edges {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }
}

/// Parses a PACE `.td` file: `s td B w+1 n`, `B` bag lines `b i v...`,
/// then tree edges.
pub fn parse_td(text: &str) -> Result<TreeDecomposition, TdError> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or(TdError::Syntax {
        line: 1,
        message: "missing `s td B w n` header".into(),
    })?;
    if header.len() != 5 || header[0] != "s" || header[1] != "td" {
        return Err(TdError::Syntax {
            line,
            message: "expected header `s td B w n`".into(),
        });
    }
    let bag_count: usize = number(header[2], line, "bag count")?;
    let max_bag: usize = number(header[3], line, "bag size")?;
    let n: u32 = number(header[4], line, "vertex count")?;
    let mut bags = BTreeMap::new();
    let mut edges = Vec::new();
    for (line, tokens) in lines {
        if tokens[0] == "b" {
            if !edges.is_empty() {
                return Err(TdError::Syntax {
                    line,
                    message: "bag line after tree edges".into(),
                });
            }
            let id: NodeId = tokens.get(1).map_or_else(
                || {
                    Err(TdError::Syntax {
                        line,
                        message: "bag line without id".into(),
                    })
                },
                |t| number(t, line, "bag id"),
            )?;
            if id == 0 || id as usize > bag_count {
                return Err(TdError::Syntax {
                    line,
                    message: format!("bag id {id} outside 1..{bag_count}"),
                });
            }
            let mut bag = BTreeSet::new();
            for t in &tokens[2..] {
                let v: u32 = number(t, line, "vertex")?;
                if v == 0 || v > n {
                    return Err(TdError::OutOfRange { line, vertex: v, n });
                }
                bag.insert(v);
            }
            if bags.insert(id, bag).is_some() {
                return Err(TdError::Syntax {
                    line,
                    message: format!("bag {id} listed twice"),
                });
            }
        } else {
            if tokens.len() != 2 {
                return Err(TdError::Syntax {
                    line,
                    message: "expected a tree edge `a b`".into(),
                });
            }
            let a: NodeId = number(tokens[0], line, "bag id")?;
            let b: NodeId = number(tokens[1], line, "bag id")?;
            edges.push((a, b));
        }
    }
    if bags.len() != bag_count {
        return Err(TdError::CountMismatch {
            what: "bags",
            expected: bag_count,
            found: bags.len(),
        });
    }
    let td = TreeDecomposition::new(n, bags, edges)?;
    let actual = td.bags.values().map(BTreeSet::len).max().unwrap_or(0);
    if actual != max_bag {
        return Err(TdError::WidthMismatch { header: max_bag, actual });
    }
    Ok(td)
}

/// One failed decomposition property, with a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TdViolation {
    VertexCountMismatch { graph: u32, decomposition: u32 },
    UncoveredVertex(u32),
    UncoveredEdge(u32, u32),
    /// The bags containing `vertex` split into several subtrees; `a` and
    /// `b` lie in different ones.
    Disconnected { vertex: u32, a: NodeId, b: NodeId },
}

impl fmt::Display for TdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TdViolation::VertexCountMismatch { graph, decomposition } => write!(
                f,
                "graph has {graph} vertices, decomposition header says {decomposition}"
            ),
            TdViolation::UncoveredVertex(v) => write!(f, "vertex {v} is in no bag"),
            TdViolation::UncoveredEdge(u, v) => write!(f, "edge {u} {v} is in no bag"),
            TdViolation::Disconnected { vertex, a, b } => write!(
                f,
                "bags containing vertex {vertex} are not connected (nodes {a} and {b})"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TdReport {
    pub violations: Vec<TdViolation>,
}

impl TdReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for TdReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks vertex coverage, edge coverage and connectivity.
pub fn validate_td(g: &HostGraph, td: &TreeDecomposition) -> TdReport {
    let mut violations = Vec::new();
    if g.n != td.n {
        violations.push(TdViolation::VertexCountMismatch {
            graph: g.n,
            decomposition: td.n,
        });
    }
    let mut holders: BTreeMap<u32, Vec<NodeId>> = BTreeMap::new();
    for (&t, bag) in &td.bags {
        for &v in bag {
            holders.entry(v).or_default().push(t);
        }
    }
    for v in 1..=g.n {
        if !holders.contains_key(&v) {
            violations.push(TdViolation::UncoveredVertex(v));
        }
    }
    for &(u, v) in &g.edges {
        if !td.bags.values().any(|b| b.contains(&u) && b.contains(&v)) {
            violations.push(TdViolation::UncoveredEdge(u, v));
        }
    }
    let adj = td.neighbours();
    for (&v, nodes) in &holders {
        let inside: BTreeSet<NodeId> = nodes.iter().copied().collect();
        let start = nodes[0];
        let mut seen = BTreeSet::from([start]);
        let mut queue = vec![start];
        while let Some(t) = queue.pop() {
            for &c in &adj[&t] {
                if inside.contains(&c) && seen.insert(c) {
                    queue.push(c);
                }
            }
        }
        if let Some(&b) = nodes.iter().find(|t| !seen.contains(t)) {
            violations.push(TdViolation::Disconnected { vertex: v, a: start, b });
        }
    }
    TdReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P3_TD: &str = "s td 2 2 3\nb 1 1 2\nb 2 2 3\n1 2\n";

    #[test]
    fn parse_graphs() {
        let p3 = parse_gr("p tw 3 2\n1 2\n2 3").unwrap();
        assert_eq!(p3.vertex_count(), 3);
        assert_eq!(p3.edges().collect::<Vec<_>>(), vec![(1, 2), (2, 3)]);
        assert!(matches!(parse_gr("p tw 2 1\n1 1"), Err(TdError::SelfLoop { vertex: 1, .. })));
        let p4 = parse_gr("c a comment\np tw 4 3\n1 2\n2 3\nc inline\n3 4\n").unwrap();
        assert_eq!(p4.edge_count(), 3);
        assert!(matches!(parse_gr("p tw 2 1\n1 3"), Err(TdError::OutOfRange { vertex: 3, .. })));
        assert!(matches!(parse_gr("p td 2 1\n1 2"), Err(TdError::Syntax { .. })));
        assert!(matches!(parse_gr("p tw 3 3\n1 2\n2 3"), Err(TdError::CountMismatch { .. })));
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = parse_gr("p tw 2 2\n1 2\n2 1").unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn parse_decompositions() {
        let td = parse_td(P3_TD).unwrap();
        assert_eq!(td.width(), 1);
        assert_eq!(td.node_count(), 2);
        assert!(matches!(
            parse_td("s td 2 3 3\nb 1 1 2\nb 2 2 3\n1 2\n"),
            Err(TdError::WidthMismatch { header: 3, actual: 2 })
        ));
        assert!(matches!(parse_td("s td 2 2 3\nb 1 1 2\nb 2 2 3\n"), Err(TdError::NotATree(_))));
        assert_eq!(parse_td(&td.to_td()).unwrap(), td);
    }

    #[test]
    fn validation() {
        let g = parse_gr("p tw 3 2\n1 2\n2 3").unwrap();
        assert!(validate_td(&g, &parse_td(P3_TD).unwrap()).is_valid());

        let missing = parse_td("s td 2 2 3\nb 1 1 2\nb 2 2\n1 2\n").unwrap();
        let report = validate_td(&g, &missing);
        assert!(report.violations.contains(&TdViolation::UncoveredVertex(3)));
        assert!(report.violations.contains(&TdViolation::UncoveredEdge(2, 3)));

        let gap = parse_td("s td 3 1 1\nb 1 1\nb 2\nb 3 1\n1 2\n2 3\n").unwrap();
        let lone = parse_gr("p tw 1 0").unwrap();
        assert_eq!(
            validate_td(&lone, &gap).violations,
            vec![TdViolation::Disconnected { vertex: 1, a: 1, b: 3 }]
        );
    }
}
