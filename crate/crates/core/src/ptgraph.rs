//! Pattern transfer graphs: which eigenvalue products an experiment can see.
//!
//! Nodes are support patterns plus a root standing for state preparation
//! and measurement. Every eigenvalue parameter is one edge; closed walks
//! through the root are the observable monomials, so the cycle rank counts
//! learnable combinations and everything else is gauge.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::space::{Column, ParamSpace};
use crate::model::{GateSet, GaugeClass, Slot};
use crate::pauli::{pattern_label, Pattern, Pauli};

/// Cap on register size for enumerating every gate label.
pub const FULL_ENUMERATION_MAX_QUBITS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Root,
    Pattern(Pattern),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeKind {
    Prep,
    Meas,
    Gate { layer: String, label: Pauli },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: Node,
    pub to: Node,
    pub kind: EdgeKind,
}

/// Which gate labels enter the graph.
#[derive(Clone, Debug)]
pub enum LabelSet {
    /// Every non-identity label of every layer.
    All,
    /// Only these (layer, pre-gate label) pairs.
    Only(Vec<(String, Pauli)>),
}

#[derive(Clone, Debug)]
pub struct PatternTransferGraph {
    n: usize,
    gates: Arc<GateSet>,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DofClassification {
    pub parameters: usize,
    pub learnable_count: usize,
    pub gauge_count: usize,
    /// (layer, a, G(a)) with a < G(a); only the product is learnable.
    pub degenerate_pairs: Vec<(String, Pauli, Pauli)>,
}

pub fn build_graph(gates: Arc<GateSet>, labels: &LabelSet) -> Result<PatternTransferGraph> {
    let n = gates.n();
    let chosen: Vec<(String, Pauli)> = match labels {
        LabelSet::All => {
            if n > FULL_ENUMERATION_MAX_QUBITS {
                return Err(Error::Invalid(format!(
                    "full label enumeration is limited to {FULL_ENUMERATION_MAX_QUBITS} qubits; restrict the labels for n={n}"
                )));
            }
            let all: Vec<Pauli> = Pauli::all(n).skip(1).collect();
            gates.ids().flat_map(|id| all.iter().map(move |a| (id.to_string(), *a))).collect()
        }
        LabelSet::Only(v) => {
            let mut seen = BTreeSet::new();
            v.iter()
                .filter(|(id, a)| !a.is_identity() && seen.insert((id.clone(), a.unsigned())))
                .map(|(id, a)| (id.clone(), a.unsigned()))
                .collect()
        }
    };
    let mut patterns = BTreeSet::new();
    let mut gate_edges = Vec::with_capacity(chosen.len());
    for (id, a) in chosen {
        let layer = gates.layer(&id)?;
        if a.n() != n {
            return Err(Error::Dimension { expected: n, found: a.n() });
        }
        let to = layer.apply(&a).support();
        patterns.insert(a.support());
        patterns.insert(to);
        gate_edges.push(Edge {
            from: Node::Pattern(a.support()),
            to: Node::Pattern(to),
            kind: EdgeKind::Gate { layer: id, label: a },
        });
    }
    let mut nodes = vec![Node::Root];
    let mut edges = Vec::new();
    for &p in &patterns {
        nodes.push(Node::Pattern(p));
        edges.push(Edge { from: Node::Root, to: Node::Pattern(p), kind: EdgeKind::Prep });
        edges.push(Edge { from: Node::Pattern(p), to: Node::Root, kind: EdgeKind::Meas });
    }
    edges.extend(gate_edges);
    Ok(PatternTransferGraph { n, gates, nodes, edges })
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl PatternTransferGraph {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    fn node_index(&self) -> BTreeMap<Node, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect()
    }

    /// Number of connected components, counting isolated nodes.
    pub fn components(&self) -> usize {
        let idx = self.node_index();
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        let mut count = self.nodes.len();
        for e in &self.edges {
            let (a, b) = (find(&mut parent, idx[&e.from]), find(&mut parent, idx[&e.to]));
            if a != b {
                parent[a] = b;
                count -= 1;
            }
        }
        count
    }

    /// Fundamental cycles of a spanning forest, as signed edge-coefficient
    /// vectors (+1 along the edge direction, -1 against it).
    pub fn cycle_basis(&self) -> Vec<Vec<i32>> {
        let idx = self.node_index();
        let v = self.nodes.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); v];
        for (k, e) in self.edges.iter().enumerate() {
            adj[idx[&e.from]].push((idx[&e.to], k));
            adj[idx[&e.to]].push((idx[&e.from], k));
        }
        // BFS tree; path to the tree root expressed as signed edge vectors
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; v];
        let mut seen = vec![false; v];
        let mut tree_edge = vec![false; self.edges.len()];
        for s in 0..v {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &(w, k) in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        parent[w] = Some((u, k));
                        tree_edge[k] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        // signed path from tree root to node u
        let path = |mut u: usize| {
            let mut c = vec![0i32; self.edges.len()];
            while let Some((p, k)) = parent[u] {
                c[k] += if idx[&self.edges[k].to] == u { 1 } else { -1 };
                u = p;
            }
            c
        };
        let mut out = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            if tree_edge[k] {
                continue;
            }
            let (a, b) = (idx[&e.from], idx[&e.to]);
            let pa = path(a);
            let pb = path(b);
            let mut c: Vec<i32> = pa.iter().zip(&pb).map(|(x, y)| x - y).collect();
            c[k] += 1;
            out.push(c);
        }
        out
    }

    pub fn classify_dof(&self) -> DofClassification {
        let e = self.edges.len();
        let learnable = e + self.components() - self.nodes.len();
        let mut degenerate_pairs = Vec::new();
        for edge in &self.edges {
            if let EdgeKind::Gate { layer, label } = &edge.kind {
                if edge.from == edge.to {
                    continue;
                }
                let image = self.gates.layer(layer).expect("validated").apply(label).unsigned();
                let partner = self
                    .edges
                    .iter()
                    .any(|f| matches!(&f.kind, EdgeKind::Gate { layer: l2, label: b } if l2 == layer && *b == image));
                if partner && *label < image {
                    degenerate_pairs.push((layer.clone(), *label, image));
                }
            }
        }
        DofClassification { parameters: e, learnable_count: learnable, gauge_count: e - learnable, degenerate_pairs }
    }

    /// The design-matrix column carried by an edge.
    pub fn edge_column(&self, e: &Edge) -> Column {
        match (&e.kind, e.from, e.to) {
            (EdgeKind::Prep, _, Node::Pattern(p)) => Column::Spam { slot: Slot::Prep, pattern: p },
            (EdgeKind::Meas, Node::Pattern(p), _) => Column::Spam { slot: Slot::Meas, pattern: p },
            (EdgeKind::Gate { layer, label }, _, _) => Column::Gate { layer: layer.clone(), label: *label },
            _ => unreachable!("SPAM edges touch the root"),
        }
    }

    /// Log-fidelity parameter space with one column per edge.
    pub fn param_space(&self) -> Result<ParamSpace> {
        let patterns = self.nodes.iter().filter_map(|n| match n {
            Node::Pattern(p) => Some(*p),
            Node::Root => None,
        });
        let labels = self.edges.iter().filter_map(|e| match &e.kind {
            EdgeKind::Gate { layer, label } => Some((layer.clone(), *label)),
            _ => None,
        });
        ParamSpace::x_basis(self.gates.clone(), patterns, labels, GaugeClass::PerPattern)
    }

    fn node_name(&self, n: &Node) -> String {
        match n {
            Node::Root => "SM".into(),
            Node::Pattern(p) => pattern_label(self.n, *p),
        }
    }

    /// Graphviz text.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph pattern_transfer {\n");
        for n in &self.nodes {
            let name = self.node_name(n);
            let _ = writeln!(s, "  \"{name}\";");
        }
        for e in &self.edges {
            let label = match &e.kind {
                EdgeKind::Prep => "S".to_string(),
                EdgeKind::Meas => "M".to_string(),
                EdgeKind::Gate { layer, label } => format!("{layer}:{label}"),
            };
            let _ = writeln!(s, "  \"{}\" -> \"{}\" [label=\"{label}\"];", self.node_name(&e.from), self.node_name(&e.to));
        }
        s.push_str("}\n");
        s
    }
}
