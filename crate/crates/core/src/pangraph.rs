//! Pangenome graphs built from a set of genomes.
//!
//! The graph is a compacted de Bruijn graph over odd k-mers. Each genome is
//! padded with `(k-1)/2` `N`s on either side so every base is the middle of
//! exactly one k-mer, and a node's sequence is the run of middle bases of its
//! k-mers. Reading a node backwards therefore gives exactly its reverse
//! complement, nodes join without overlap, and every input genome is the
//! concatenation of the nodes along its path. Only adjacencies seen in some
//! genome become edges, and the edge count is the number of traversals.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gfa::{GfaDocument, Orientation};
use crate::graph::{AnnotatedGraph, Edge, Visit};
use crate::tangle::{visit_counts, Walk};

/// Largest k whose 3-bit packed k-mers fit in 128 bits.
pub const MAX_GRAPH_K: usize = 41;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PangraphError {
    #[error("graph k must be odd and within 3..={MAX_GRAPH_K}, got {0}")]
    BadK(usize),
    #[error("genome `{id}` has invalid base `{base}` at {position}")]
    BadBase { id: String, base: char, position: usize },
    #[error("genome `{0}` is empty")]
    EmptyGenome(String),
    #[error("no genomes given")]
    NoGenomes,
}

/// A graph together with the path each input genome takes through it.
#[derive(Debug, Clone, PartialEq)]
pub struct Pangenome {
    pub graph: AnnotatedGraph,
    pub k: usize,
    pub paths: Vec<(String, Walk)>,
}

impl Pangenome {
    pub fn path(&self, id: &str) -> Option<&Walk> {
        self.paths.iter().find(|(g, _)| g == id).map(|(_, w)| w)
    }

    /// GFA with `P` lines for the genome paths.
    pub fn to_gfa(&self) -> GfaDocument {
        let mut doc = self.graph.to_gfa();
        for (id, w) in &self.paths {
            let steps: Vec<String> = w
                .visits
                .iter()
                .map(|v| format!("{}{}", self.graph.node(v.node).id, v.orient.as_char()))
                .collect();
            doc.other.push(format!("P\t{id}\t{}\t*", steps.join(",")));
        }
        doc
    }
}

/// Copy numbers equal to the visit counts of `walk`.
pub fn oracle_weights(g: &AnnotatedGraph, walks: &[&Walk]) -> Vec<f64> {
    visit_counts(g, walks).into_iter().map(|c| c as f64).collect()
}

fn code3(b: u8) -> Option<u128> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        b'N' => Some(4),
        _ => None,
    }
}

fn comp3(c: u128) -> u128 {
    if c == 4 {
        4
    } else {
        3 - c
    }
}

const DECODE3: [u8; 5] = *b"ACGTN";

/// Oriented k-mer slot: `2 * kmer + (0 forward, 1 reverse)`.
type Slot = u32;

#[inline]
fn flip(s: Slot) -> Slot {
    s ^ 1
}

#[inline]
fn kmer_of(s: Slot) -> usize {
    (s >> 1) as usize
}

struct KmerGraph {
    /// Middle base of each canonical k-mer.
    middle: Vec<u8>,
    succ: Vec<Vec<Slot>>,
    genomes: Vec<Vec<Slot>>,
}

impl KmerGraph {
    fn build(genomes: &[(&str, &str)], k: usize) -> Result<Self, PangraphError> {
        let m = (k - 1) / 2;
        let mask: u128 = (1u128 << (3 * k)) - 1;
        let shift = 3 * (k - 1);
        let mut ids: HashMap<u128, u32> = HashMap::new();
        let mut middle = Vec::new();
        let mut paths = Vec::new();
        let mut edges: HashSet<(Slot, Slot)> = HashSet::new();
        for (id, seq) in genomes {
            if seq.is_empty() {
                return Err(PangraphError::EmptyGenome(id.to_string()));
            }
            if let Some((position, &b)) = seq.as_bytes().iter().enumerate().find(|(_, b)| !b"ACGT".contains(b)) {
                return Err(PangraphError::BadBase {
                    id: id.to_string(),
                    base: b as char,
                    position,
                });
            }
            let padded: Vec<u8> = std::iter::repeat_n(b'N', m)
                .chain(seq.bytes())
                .chain(std::iter::repeat_n(b'N', m))
                .collect();
            let (mut fwd, mut rev) = (0u128, 0u128);
            let mut path = Vec::with_capacity(seq.len());
            for (i, &b) in padded.iter().enumerate() {
                let c = code3(b).expect("validated");
                fwd = ((fwd << 3) | c) & mask;
                rev = (rev >> 3) | (comp3(c) << shift);
                if i + 1 < k {
                    continue;
                }
                let (canon, orient) = if fwd <= rev { (fwd, 0) } else { (rev, 1) };
                let next = ids.len() as u32;
                let kid = *ids.entry(canon).or_insert_with(|| {
                    middle.push(DECODE3[((canon >> (3 * (k - 1 - m))) & 7) as usize]);
                    next
                });
                path.push(2 * kid + orient);
            }
            for w in path.windows(2) {
                edges.insert((w[0], w[1]));
                edges.insert((flip(w[1]), flip(w[0])));
            }
            paths.push(path);
        }
        let mut succ = vec![Vec::new(); 2 * middle.len()];
        for &(a, b) in &edges {
            succ[a as usize].push(b);
        }
        for s in &mut succ {
            s.sort_unstable();
        }
        Ok(Self {
            middle,
            succ,
            genomes: paths,
        })
    }

    fn pred(&self, s: Slot) -> impl Iterator<Item = Slot> + '_ {
        self.succ[flip(s) as usize].iter().map(|&p| flip(p))
    }

    fn only_succ(&self, s: Slot) -> Option<Slot> {
        match self.succ[s as usize].as_slice() {
            [n] => Some(*n),
            _ => None,
        }
    }

    fn only_pred(&self, s: Slot) -> Option<Slot> {
        let mut it = self.pred(s);
        match (it.next(), it.next()) {
            (Some(p), None) => Some(p),
            _ => None,
        }
    }

    /// Whether `a -> b` is the only way out of `a` and into `b`.
    fn joins(&self, a: Slot, b: Slot) -> bool {
        kmer_of(a) != kmer_of(b) && self.only_succ(a) == Some(b) && self.only_pred(b) == Some(a)
    }

    /// Maximal non-branching chains of oriented k-mers.
    fn unitigs(&self) -> Vec<Vec<Slot>> {
        let n = self.middle.len();
        let mut done = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if done[start] {
                continue;
            }
            let mut s = (2 * start) as Slot;
            let mut seen = HashSet::from([kmer_of(s)]);
            while let Some(p) = self.only_pred(s) {
                if !self.joins(p, s) || done[kmer_of(p)] || !seen.insert(kmer_of(p)) {
                    break;
                }
                s = p;
            }
            let mut chain = vec![s];
            done[kmer_of(s)] = true;
            let mut cur = s;
            while let Some(nx) = self.only_succ(cur) {
                if !self.joins(cur, nx) || done[kmer_of(nx)] {
                    break;
                }
                done[kmer_of(nx)] = true;
                chain.push(nx);
                cur = nx;
            }
            out.push(chain);
        }
        out
    }

    fn base(&self, s: Slot) -> u8 {
        let b = self.middle[kmer_of(s)];
        if s & 1 == 0 {
            b
        } else {
            crate::dna::complement(b).expect("ACGT")
        }
    }
}

/// Builds the graph of `genomes` (`(id, sequence)` pairs) with odd `k`.
pub fn build_pangenome(genomes: &[(&str, &str)], k: usize) -> Result<Pangenome, PangraphError> {
    if !(3..=MAX_GRAPH_K).contains(&k) || k.is_multiple_of(2) {
        return Err(PangraphError::BadK(k));
    }
    if genomes.is_empty() {
        return Err(PangraphError::NoGenomes);
    }
    let kg = KmerGraph::build(genomes, k)?;
    let unitigs = kg.unitigs();
    // Position of each k-mer: (unitig, index, stored in forward orientation).
    let mut place = vec![(0usize, 0usize, true); kg.middle.len()];
    for (u, chain) in unitigs.iter().enumerate() {
        for (i, &s) in chain.iter().enumerate() {
            place[kmer_of(s)] = (u, i, s & 1 == 0);
        }
    }

    // Thread each genome into unitig visits.
    let mut threads: Vec<Vec<Visit>> = Vec::new();
    for path in &kg.genomes {
        let mut visits = Vec::new();
        let mut left = 0usize;
        for &s in path {
            let (u, _, stored_fwd) = place[kmer_of(s)];
            if left == 0 {
                let orient = if (s & 1 == 0) == stored_fwd {
                    Orientation::Forward
                } else {
                    Orientation::Reverse
                };
                visits.push(Visit::new(u, orient));
                left = unitigs[u].len();
            }
            left -= 1;
        }
        threads.push(visits);
    }

    // Number nodes by first appearance and orient them as first traversed.
    let mut order: Vec<Option<(usize, bool)>> = vec![None; unitigs.len()];
    let mut next = 0usize;
    for t in &threads {
        for v in t {
            if order[v.node].is_none() {
                order[v.node] = Some((next, v.orient == Orientation::Reverse));
                next += 1;
            }
        }
    }
    let mut sequences = vec![String::new(); next];
    for (u, chain) in unitigs.iter().enumerate() {
        if let Some((id, flipped)) = order[u] {
            let bases: Vec<u8> = if flipped {
                chain.iter().rev().map(|&s| kg.base(flip(s))).collect()
            } else {
                chain.iter().map(|&s| kg.base(s)).collect()
            };
            sequences[id] = String::from_utf8(bases).expect("ascii");
        }
    }
    let mut graph = AnnotatedGraph::new(k);
    for (i, seq) in sequences.into_iter().enumerate() {
        graph
            .add_node(format!("s{}", i + 1), seq)
            .expect("unique non-empty nodes");
    }
    let mut paths = Vec::new();
    for (t, (id, _)) in threads.iter().zip(genomes) {
        let visits: Vec<Visit> = t
            .iter()
            .map(|v| {
                let (node, flipped) = order[v.node].expect("visited");
                let orient = if flipped { v.orient.flip() } else { v.orient };
                Visit::new(node, orient)
            })
            .collect();
        for w in visits.windows(2) {
            let c = graph.edge_count(w[0], w[1]).unwrap_or(0);
            graph.add_edge(w[0], w[1], 0);
            graph.set_edge_count(Edge::new(w[0], w[1]), c + 1);
        }
        paths.push((id.to_string(), Walk::new(visits)));
    }
    Ok(Pangenome { graph, k, paths })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub total_length: usize,
}

pub fn summarize(g: &AnnotatedGraph) -> GraphSummary {
    GraphSummary {
        nodes: g.num_nodes(),
        edges: g.num_edges(),
        total_length: g.nodes().iter().map(|n| n.len()).sum(),
    }
}
