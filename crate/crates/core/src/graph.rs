//! Oriented, vertex-weighted pangenome graph.
//!
//! Nodes carry a DNA sequence, a k-mer count and a copy-number weight. Every
//! edge `(a,o1) -> (b,o2)` implies its mirror `(b,!o2) -> (a,!o1)`; the graph
//! stores one canonical representative per mirror pair so the pairing
//! invariant holds by construction.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::dna::reverse_complement;
use crate::gfa::{GfaDocument, GfaLink, GfaSegment, Orientation, TagValue, Tags};

/// Tag holding the expected number of unique k-mers of a node.
pub const EXPECTED_UNIQUE_TAG: &str = "ue";
/// Tag holding the normalised copy number of a node.
pub const COPY_NUMBER_TAG: &str = "cn";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("segment `{0}` has no sequence")]
    EmptyNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("k must be at least 2, got {0}")]
    BadK(usize),
    #[error("all k-mer counts are zero; baseline depth is undefined")]
    ZeroCoverage,
    #[error("sequencing depth must be positive and finite, got {0}")]
    BadDepth(f64),
    #[error("invalid sequence for node `{id}`: {source}")]
    BadSequence {
        id: String,
        #[source]
        source: crate::dna::DnaError,
    },
}

/// One visit to an oriented node, `(v, +)` or `(v, -)`. `node` indexes
/// [`AnnotatedGraph::nodes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Visit {
    pub node: usize,
    pub orient: Orientation,
}

impl Visit {
    pub fn new(node: usize, orient: Orientation) -> Self {
        Self { node, orient }
    }

    pub fn fwd(node: usize) -> Self {
        Self::new(node, Orientation::Forward)
    }

    pub fn rev(node: usize) -> Self {
        Self::new(node, Orientation::Reverse)
    }

    pub fn flip(self) -> Self {
        Self::new(self.node, self.orient.flip())
    }

    /// Dense index `2 * node + orientation`.
    pub fn slot(self) -> usize {
        2 * self.node + self.orient.index()
    }

    pub fn from_slot(slot: usize) -> Self {
        Self::new(slot / 2, Orientation::from_index(slot % 2))
    }
}

impl fmt::Display for Visit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.node, self.orient)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: Visit,
    pub to: Visit,
}

impl Edge {
    pub fn new(from: Visit, to: Visit) -> Self {
        Self { from, to }
    }

    /// The implied reverse-strand edge.
    pub fn mirror(self) -> Self {
        Self::new(self.to.flip(), self.from.flip())
    }

    /// Smaller of the edge and its mirror.
    pub fn canonical(self) -> Self {
        self.min(self.mirror())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub sequence: String,
    /// Observed k-mer count (`KC`).
    pub kmer_count: u64,
    /// Number of node k-mers expected to map uniquely, when known.
    pub expected_unique: Option<u64>,
    /// Copy number `w(v)`.
    pub weight: f64,
}

impl NodeRecord {
    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedGraph {
    nodes: Vec<NodeRecord>,
    index: HashMap<String, usize>,
    /// Canonical edge -> edge count (`EC`).
    edges: BTreeMap<Edge, u64>,
    succ: Vec<Vec<Visit>>,
    k: usize,
    baseline_depth: Option<f64>,
}

impl AnnotatedGraph {
    pub fn new(k: usize) -> Self {
        Self {
            nodes: Vec::new(),
            index: HashMap::new(),
            edges: BTreeMap::new(),
            succ: Vec::new(),
            k,
            baseline_depth: None,
        }
    }

    /// Adds a node with zero counts and weight, returning its index.
    pub fn add_node(&mut self, id: impl Into<String>, sequence: impl Into<String>) -> Result<usize, GraphError> {
        let id = id.into();
        let sequence = sequence.into();
        if sequence.is_empty() {
            return Err(GraphError::EmptyNode(id));
        }
        if self.index.contains_key(&id) {
            return Err(GraphError::DuplicateNode(id));
        }
        let i = self.nodes.len();
        self.index.insert(id.clone(), i);
        self.nodes.push(NodeRecord {
            id,
            sequence,
            kmer_count: 0,
            expected_unique: None,
            weight: 0.0,
        });
        self.succ.push(Vec::new());
        self.succ.push(Vec::new());
        Ok(i)
    }

    /// Adds an edge and its mirror. An existing edge keeps the larger count.
    pub fn add_edge(&mut self, from: Visit, to: Visit, count: u64) {
        assert!(
            from.node < self.nodes.len() && to.node < self.nodes.len(),
            "edge endpoint out of range"
        );
        let e = Edge::new(from, to).canonical();
        match self.edges.get_mut(&e) {
            Some(c) => *c = (*c).max(count),
            None => {
                self.edges.insert(e, count);
                self.link(e);
            }
        }
    }

    fn link(&mut self, e: Edge) {
        let mut insert = |from: Visit, to: Visit| {
            let list = &mut self.succ[from.slot()];
            if let Err(pos) = list.binary_search(&to) {
                list.insert(pos, to);
            }
        };
        insert(e.from, e.to);
        let m = e.mirror();
        insert(m.from, m.to);
    }

    fn rebuild_adjacency(&mut self) {
        self.succ = vec![Vec::new(); 2 * self.nodes.len()];
        let edges: Vec<Edge> = self.edges.keys().copied().collect();
        for e in edges {
            self.link(e);
        }
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeRecord {
        &self.nodes[i]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn baseline_depth(&self) -> Option<f64> {
        self.baseline_depth
    }

    pub fn weights(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.weight).collect()
    }

    pub fn set_weights(&mut self, weights: &[f64]) {
        assert_eq!(weights.len(), self.nodes.len());
        for (n, &w) in self.nodes.iter_mut().zip(weights) {
            n.weight = w;
        }
    }

    pub fn set_kmer_count(&mut self, node: usize, count: u64, expected_unique: Option<u64>) {
        self.nodes[node].kmer_count = count;
        self.nodes[node].expected_unique = expected_unique;
    }

    /// Sets the count of an existing edge (either representative of the pair).
    pub fn set_edge_count(&mut self, edge: Edge, count: u64) -> bool {
        match self.edges.get_mut(&edge.canonical()) {
            Some(c) => {
                *c = count;
                true
            }
            None => false,
        }
    }

    pub fn has_edge(&self, from: Visit, to: Visit) -> bool {
        self.edges.contains_key(&Edge::new(from, to).canonical())
    }

    /// Edge `u -> v` of the unoriented view, i.e. `(u,+) -> (v,+)`.
    pub fn has_forward_edge(&self, u: usize, v: usize) -> bool {
        self.has_edge(Visit::fwd(u), Visit::fwd(v))
    }

    pub fn edge_count(&self, from: Visit, to: Visit) -> Option<u64> {
        self.edges.get(&Edge::new(from, to).canonical()).copied()
    }

    /// Oriented successors of `v`, sorted.
    pub fn successors(&self, v: Visit) -> &[Visit] {
        &self.succ[v.slot()]
    }

    /// Canonical edges with their counts.
    pub fn edges(&self) -> impl Iterator<Item = (Edge, u64)> + '_ {
        self.edges.iter().map(|(e, c)| (*e, *c))
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Every oriented edge, mirrors included.
    pub fn oriented_edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(2 * self.edges.len());
        for e in self.edges.keys() {
            out.push(*e);
            if e.mirror() != *e {
                out.push(e.mirror());
            }
        }
        out.sort();
        out
    }

    /// Builds a graph from a GFA document. `KC` is read from `KC:i`, else
    /// `SC:i`, else `dc:f` times the node length.
    pub fn from_gfa(doc: &GfaDocument, k: usize) -> Result<Self, GraphError> {
        if k < 2 {
            return Err(GraphError::BadK(k));
        }
        let mut g = AnnotatedGraph::new(k);
        for s in &doc.segments {
            let seq = s.sequence.clone().unwrap_or_default();
            let i = g.add_node(s.id.clone(), seq)?;
            let len = g.nodes[i].len() as f64;
            let kc = s
                .kmer_count()
                .or_else(|| s.sequence_count())
                .map(|c| c.max(0) as u64)
                .or_else(|| s.depth_fraction().map(|f| (f * len).round().max(0.0) as u64))
                .unwrap_or(0);
            let node = &mut g.nodes[i];
            node.kmer_count = kc;
            node.expected_unique = s
                .tags
                .get(EXPECTED_UNIQUE_TAG)
                .and_then(TagValue::as_int)
                .map(|v| v.max(0) as u64);
            node.weight = s.tags.get(COPY_NUMBER_TAG).and_then(TagValue::as_float).unwrap_or(0.0);
        }
        if !g.nodes.is_empty() && g.nodes.iter().all(|n| n.len() < k) {
            log::warn!("k = {k} exceeds every node length; k-mer derived fields default to 0");
        }
        for l in &doc.links {
            let a = g
                .node_index(&l.from_id)
                .ok_or_else(|| GraphError::UnknownNode(l.from_id.clone()))?;
            let b = g
                .node_index(&l.to_id)
                .ok_or_else(|| GraphError::UnknownNode(l.to_id.clone()))?;
            let ec = l.edge_count().unwrap_or(0).max(0) as u64;
            g.add_edge(Visit::new(a, l.from_orient), Visit::new(b, l.to_orient), ec);
        }
        g.rebuild_adjacency();
        Ok(g)
    }

    /// Writes segments with `KC`, `ue` and `cn` tags and one link per mirror
    /// pair with its `EC` tag.
    pub fn to_gfa(&self) -> GfaDocument {
        let mut doc = GfaDocument::default();
        for n in &self.nodes {
            let mut s = GfaSegment::new(n.id.clone(), n.sequence.clone());
            s.tags.insert("KC".into(), TagValue::Int(n.kmer_count as i64));
            if let Some(u) = n.expected_unique {
                s.tags.insert(EXPECTED_UNIQUE_TAG.into(), TagValue::Int(u as i64));
            }
            s.tags.insert(COPY_NUMBER_TAG.into(), TagValue::Float(n.weight));
            doc.segments.push(s);
        }
        for (e, c) in &self.edges {
            let mut tags = Tags::new();
            tags.insert("EC".into(), TagValue::Int(*c as i64));
            doc.links.push(GfaLink {
                from_id: self.nodes[e.from.node].id.clone(),
                from_orient: e.from.orient,
                to_id: self.nodes[e.to.node].id.clone(),
                to_orient: e.to.orient,
                overlap: "0M".into(),
                tags,
            });
        }
        doc
    }

    /// Per-node depth `KC / max(1, L - k + 1)`, or `KC / expected_unique` when
    /// an expected unique k-mer count is recorded and positive.
    pub fn node_depths(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|n| {
                let denom = match n.expected_unique {
                    Some(u) if u > 0 => u as f64,
                    _ => (n.len() as f64 - self.k as f64 + 1.0).max(1.0),
                };
                n.kmer_count as f64 / denom
            })
            .collect()
    }

    /// Converts k-mer counts to copy numbers. The baseline is the supplied
    /// sequencing depth, or the length-weighted median depth of the nodes
    /// with non-zero depth.
    pub fn normalize_copy_numbers(&self, sequencing_depth: Option<f64>) -> Result<Self, GraphError> {
        if self.nodes.iter().all(|n| n.kmer_count == 0) {
            return Err(GraphError::ZeroCoverage);
        }
        let depths = self.node_depths();
        let baseline = match sequencing_depth {
            Some(d) if d > 0.0 && d.is_finite() => d,
            Some(d) => return Err(GraphError::BadDepth(d)),
            None => {
                let pairs: Vec<(f64, f64)> = depths
                    .iter()
                    .zip(&self.nodes)
                    .filter(|(d, _)| **d > 0.0)
                    .map(|(d, n)| (*d, n.len() as f64))
                    .collect();
                weighted_median(&pairs)
            }
        };
        let mut g = self.clone();
        for (n, d) in g.nodes.iter_mut().zip(&depths) {
            n.weight = d / baseline;
        }
        g.baseline_depth = Some(baseline);
        Ok(g)
    }

    /// Removes superfluous zero-count edges around well-supported nodes.
    ///
    /// A node qualifies when its forward orientation has at least two in-edges
    /// and two out-edges, and at least one in-edge and one out-edge have a
    /// non-zero count and lead to a node with non-zero weight. Its zero-count
    /// edges are then removed one at a time, skipping any removal that would
    /// split the positive-weight part of the graph. Nodes are visited once,
    /// in index order.
    pub fn trim_zero_weight_edges(&self) -> Self {
        let mut g = self.clone();
        for b in 0..g.nodes.len() {
            let here = Visit::fwd(b);
            let ins: Vec<Visit> = g.successors(here.flip()).iter().map(|v| v.flip()).collect();
            let outs: Vec<Visit> = g.successors(here).to_vec();
            if ins.len() < 2 || outs.len() < 2 {
                continue;
            }
            let supported = |v: &Visit, e: Edge| g.nodes[v.node].weight > 0.0 && g.edges[&e.canonical()] > 0;
            let in_ok = ins.iter().any(|u| supported(u, Edge::new(*u, here)));
            let out_ok = outs.iter().any(|v| supported(v, Edge::new(here, *v)));
            if !in_ok || !out_ok {
                continue;
            }
            let candidates: Vec<Edge> = ins
                .iter()
                .map(|u| Edge::new(*u, here))
                .chain(outs.iter().map(|v| Edge::new(here, *v)))
                .map(Edge::canonical)
                .filter(|e| g.edges[e] == 0)
                .collect();
            for e in candidates {
                if g.edges.contains_key(&e) && g.removal_keeps_connectivity(e) {
                    g.edges.remove(&e);
                    g.rebuild_adjacency();
                }
            }
        }
        g
    }

    fn removal_keeps_connectivity(&self, e: Edge) -> bool {
        let (a, b) = (e.from.node, e.to.node);
        let positive = |v: usize| self.nodes[v].weight > 0.0;
        if a == b || !positive(a) || !positive(b) {
            return true;
        }
        // Breadth-first search from `a` over positive nodes without `e`.
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([a]);
        seen[a] = true;
        let adj = self.undirected_adjacency(Some(e));
        while let Some(u) = queue.pop_front() {
            if u == b {
                return true;
            }
            for &v in &adj[u] {
                if !seen[v] && positive(v) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        false
    }

    fn undirected_adjacency(&self, skip: Option<Edge>) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in self.edges.keys() {
            if Some(*e) == skip {
                continue;
            }
            adj[e.from.node].push(e.to.node);
            adj[e.to.node].push(e.from.node);
        }
        adj
    }

    /// Weakly connected components of the subgraph induced by nodes with
    /// positive weight.
    pub fn positive_components(&self) -> usize {
        let adj = self.undirected_adjacency(None);
        let positive = |v: usize| self.nodes[v].weight > 0.0;
        let mut seen = vec![false; self.nodes.len()];
        let mut count = 0;
        for s in 0..self.nodes.len() {
            if seen[s] || !positive(s) {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if !seen[v] && positive(v) {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    /// Node sequence as read in the given orientation.
    pub fn oriented_sequence(&self, v: Visit) -> String {
        let s = &self.nodes[v.node].sequence;
        match v.orient {
            Orientation::Forward => s.clone(),
            Orientation::Reverse => reverse_complement(s).expect("node sequences are validated DNA"),
        }
    }
}

/// Smallest value whose cumulative weight reaches half of the total.
fn weighted_median(pairs: &[(f64, f64)]) -> f64 {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = sorted.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for (v, w) in &sorted {
        acc += w;
        if acc >= total / 2.0 {
            return *v;
        }
    }
    sorted.last().map(|p| p.0).unwrap_or(1.0)
}
