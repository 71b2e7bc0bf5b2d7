//! Read-based copy-number annotation by exact k-mer matching.
//!
//! Node sequences (and optional alternative recognition sequences) are
//! indexed by canonical k-mer. Each read k-mer that hits exactly one node
//! position counts for that node. Runs of ambiguous k-mers between, or
//! beside, unique hits are credited when the unique hits pin down where they
//! lie: inside the same node, at a read end, or along the only graph path
//! whose length fits the gap. Consecutive nodes along a resolved path count
//! as edge transitions.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dna::base_code;
use crate::graph::{AnnotatedGraph, Edge, Visit};
use crate::synth::Read;

pub const MAX_K: usize = 64;
/// Path-search expansions allowed per gap before it is treated as ambiguous.
const PATH_SEARCH_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KmerError {
    #[error("k = {0} is outside 1..=64")]
    BadK(usize),
    #[error("k = {k} exceeds the longest node ({longest} bp); the index would be empty")]
    EmptyIndex { k: usize, longest: usize },
    #[error("variant given for unknown node `{0}`")]
    UnknownVariantNode(String),
    #[error("hits refer to node index {0}, graph has fewer nodes")]
    UnknownNode(usize),
    #[error("hits refer to edge {0} which is not in the graph")]
    UnknownEdge(String),
    #[error("node sequence file line {line}: {message}")]
    NodeSeq { line: usize, message: String },
}

/// One indexed k-mer position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub node: u32,
    pub offset: u32,
    /// Whether the node's forward k-mer at `offset` is the canonical form.
    pub canonical_forward: bool,
}

/// 2-bit packed k-mers of a sequence: `(position, forward code, reverse
/// complement code)`, skipping windows with non-ACGT bases.
pub fn kmer_codes(seq: &[u8], k: usize) -> Vec<(usize, u128, u128)> {
    let mut out = Vec::new();
    if k == 0 || k > MAX_K || seq.len() < k {
        return out;
    }
    let mask: u128 = if k == 64 { u128::MAX } else { (1u128 << (2 * k)) - 1 };
    let shift = 2 * (k - 1);
    let (mut fwd, mut rev, mut valid) = (0u128, 0u128, 0usize);
    for (i, &b) in seq.iter().enumerate() {
        match base_code(b) {
            Some(c) => {
                fwd = ((fwd << 2) | c as u128) & mask;
                rev = (rev >> 2) | (((3 - c) as u128) << shift);
                valid += 1;
            }
            None => valid = 0,
        }
        if valid >= k {
            out.push((i + 1 - k, fwd, rev));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct KmerIndex {
    k: usize,
    table: HashMap<u128, Vec<Occurrence>>,
    node_lengths: Vec<usize>,
    expected_unique: Vec<u64>,
}

impl KmerIndex {
    /// Indexes every k-mer of every node sequence and of the listed variant
    /// sequences. A variant k-mer already present in an earlier sequence of
    /// the same node is not added again, so shared k-mers stay unique.
    pub fn build(
        g: &AnnotatedGraph,
        k: usize,
        variants: Option<&BTreeMap<String, Vec<String>>>,
    ) -> Result<Self, KmerError> {
        if k == 0 || k > MAX_K {
            return Err(KmerError::BadK(k));
        }
        let longest = g.nodes().iter().map(|n| n.len()).max().unwrap_or(0);
        if k > longest {
            return Err(KmerError::EmptyIndex { k, longest });
        }
        if let Some(vars) = variants {
            if let Some(id) = vars.keys().find(|id| g.node_index(id).is_none()) {
                return Err(KmerError::UnknownVariantNode(id.clone()));
            }
        }
        let mut table: HashMap<u128, Vec<Occurrence>> = HashMap::new();
        for (v, n) in g.nodes().iter().enumerate() {
            let mut seen: HashMap<u128, ()> = HashMap::new();
            let mut sequences = vec![n.sequence.as_str()];
            if let Some(extra) = variants.and_then(|m| m.get(&n.id)) {
                sequences.extend(extra.iter().map(String::as_str));
            }
            for seq in sequences {
                let mut local: Vec<(u128, Occurrence)> = Vec::new();
                for (pos, f, r) in kmer_codes(seq.as_bytes(), k) {
                    let canon = f.min(r);
                    if seen.contains_key(&canon) {
                        continue;
                    }
                    local.push((
                        canon,
                        Occurrence {
                            node: v as u32,
                            offset: pos as u32,
                            canonical_forward: f <= r,
                        },
                    ));
                }
                for (canon, occ) in &local {
                    table.entry(*canon).or_default().push(*occ);
                }
                for (canon, _) in local {
                    seen.insert(canon, ());
                }
            }
        }
        let mut expected_unique = vec![0u64; g.num_nodes()];
        for (v, n) in g.nodes().iter().enumerate() {
            expected_unique[v] = kmer_codes(n.sequence.as_bytes(), k)
                .iter()
                .filter(|(_, f, r)| f != r && table.get(&(*f).min(*r)).is_some_and(|l| l.len() == 1))
                .count() as u64;
        }
        Ok(Self {
            k,
            table,
            node_lengths: g.nodes().iter().map(|n| n.len()).collect(),
            expected_unique,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn occurrences(&self, canonical: u128) -> &[Occurrence] {
        self.table.get(&canonical).map_or(&[], Vec::as_slice)
    }

    /// A k-mer is unique when it occurs at exactly one indexed position.
    pub fn is_unique(&self, canonical: u128) -> bool {
        self.occurrences(canonical).len() == 1
    }

    pub fn expected_unique(&self) -> &[u64] {
        &self.expected_unique
    }

    /// Orientation and oriented offset at which a read k-mer with the given
    /// strand sits in an occurrence.
    fn place(&self, occ: &Occurrence, read_canonical_forward: bool) -> (Visit, usize) {
        let node = occ.node as usize;
        if read_canonical_forward == occ.canonical_forward {
            (Visit::fwd(node), occ.offset as usize)
        } else {
            (Visit::rev(node), self.node_lengths[node] - self.k - occ.offset as usize)
        }
    }
}

/// Per-node hit counts and per-edge transition counts (keys are canonical
/// edges).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeHits {
    pub unique: Vec<u64>,
    pub rescued: Vec<u64>,
    pub transitions: BTreeMap<Edge, u64>,
    /// Unique k-mers per node in the index, recorded as `ue` on annotation.
    #[serde(default)]
    pub expected_unique: Vec<u64>,
}

impl NodeHits {
    pub fn new(nodes: usize) -> Self {
        Self {
            unique: vec![0; nodes],
            rescued: vec![0; nodes],
            transitions: BTreeMap::new(),
            expected_unique: Vec::new(),
        }
    }

    pub fn total(&self, node: usize) -> u64 {
        self.unique[node] + self.rescued[node]
    }

    pub fn credited(&self) -> u64 {
        self.unique.iter().sum::<u64>() + self.rescued.iter().sum::<u64>()
    }

    fn absorb(&mut self, r: ReadHits) {
        for v in r.unique {
            self.unique[v as usize] += 1;
        }
        for v in r.rescued {
            self.rescued[v as usize] += 1;
        }
        for e in r.transitions {
            *self.transitions.entry(e).or_insert(0) += 1;
        }
    }
}

#[derive(Debug, Default)]
struct ReadHits {
    unique: Vec<u32>,
    rescued: Vec<u32>,
    transitions: Vec<Edge>,
}

#[derive(Debug, Clone, Copy)]
enum Hit {
    Missing,
    Unique { visit: Visit, pos: usize },
    Multi { canonical: u128, canonical_forward: bool },
}

struct Annotator<'a> {
    idx: &'a KmerIndex,
    g: &'a AnnotatedGraph,
}

impl Annotator<'_> {
    fn classify(&self, read: &[u8]) -> Vec<Hit> {
        let k = self.idx.k;
        let mut hits = vec![Hit::Missing; read.len().saturating_sub(k - 1)];
        for (pos, f, r) in kmer_codes(read, k) {
            // Palindromes cannot be oriented and are never used.
            if f == r {
                continue;
            }
            let canonical = f.min(r);
            let occ = self.idx.occurrences(canonical);
            hits[pos] = match occ.len() {
                0 => Hit::Missing,
                1 => {
                    let (visit, p) = self.idx.place(&occ[0], f <= r);
                    Hit::Unique { visit, pos: p }
                }
                _ => Hit::Multi {
                    canonical,
                    canonical_forward: f <= r,
                },
            };
        }
        hits
    }

    /// Whether an ambiguous k-mer has an occurrence at oriented position
    /// `pos` of `visit`.
    fn matches(&self, hit: Hit, visit: Visit, pos: usize) -> bool {
        let Hit::Multi {
            canonical,
            canonical_forward,
        } = hit
        else {
            return false;
        };
        self.idx
            .occurrences(canonical)
            .iter()
            .filter(|o| o.node as usize == visit.node)
            .any(|o| self.idx.place(o, canonical_forward) == (visit, pos))
    }

    fn len(&self, v: Visit) -> usize {
        self.g.node(v.node).len()
    }

    /// All oriented paths `from -> ... -> to` whose intermediate nodes have
    /// total length `gap`, up to two of them. `None` when the search is cut
    /// short.
    fn paths(&self, from: Visit, to: Visit, gap: usize) -> Option<Vec<Vec<Visit>>> {
        let mut found = Vec::new();
        let mut stack = vec![from];
        let mut budget = PATH_SEARCH_LIMIT;
        if self.extend(&mut stack, to, gap, &mut found, &mut budget) {
            Some(found)
        } else {
            None
        }
    }

    fn extend(
        &self,
        stack: &mut Vec<Visit>,
        to: Visit,
        rem: usize,
        found: &mut Vec<Vec<Visit>>,
        budget: &mut usize,
    ) -> bool {
        let last = *stack.last().expect("non-empty");
        for &w in self.g.successors(last) {
            if found.len() >= 2 {
                return true;
            }
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            if w == to && rem == 0 {
                let mut p = stack.clone();
                p.push(w);
                found.push(p);
                continue;
            }
            let l = self.len(w);
            if l <= rem {
                stack.push(w);
                let ok = self.extend(stack, to, rem - l, found, budget);
                stack.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    fn annotate(&self, read: &[u8]) -> ReadHits {
        let k = self.idx.k;
        let hits = self.classify(read);
        let mut out = ReadHits::default();
        let anchors: Vec<(usize, Visit, usize)> = hits
            .iter()
            .enumerate()
            .filter_map(|(q, h)| match *h {
                Hit::Unique { visit, pos } => Some((q, visit, pos)),
                _ => None,
            })
            .collect();
        let Some(&(first_q, first_v, first_p)) = anchors.first() else {
            return out;
        };
        for &(_, v, _) in &anchors {
            out.unique.push(v.node as u32);
        }
        // Leading read end.
        for (q, &hit) in hits.iter().enumerate().take(first_q) {
            if let Some(p) = first_p.checked_sub(first_q - q) {
                if self.matches(hit, first_v, p) {
                    out.rescued.push(first_v.node as u32);
                }
            }
        }
        // Trailing read end.
        let &(last_q, last_v, last_p) = anchors.last().expect("non-empty");
        let last_max = self.len(last_v) - k;
        for (q, &hit) in hits.iter().enumerate().skip(last_q + 1) {
            let p = last_p + (q - last_q);
            if p <= last_max && self.matches(hit, last_v, p) {
                out.rescued.push(last_v.node as u32);
            }
        }
        for pair in anchors.windows(2) {
            let (i, va, pa) = pair[0];
            let (j, vb, pb) = pair[1];
            if j == i + 1 && va == vb && pb == pa + 1 {
                continue;
            }
            if va == vb && pb >= pa && pb - pa == j - i {
                for (q, &hit) in hits.iter().enumerate().take(j).skip(i + 1) {
                    if self.matches(hit, va, pa + (q - i)) {
                        out.rescued.push(va.node as u32);
                    }
                }
                continue;
            }
            // Read coordinate of the start of each node must line up.
            let start_a = i as isize - pa as isize;
            let start_b = j as isize - pb as isize;
            let gap = start_b - start_a - self.len(va) as isize;
            if gap < 0 {
                continue;
            }
            let Some(paths) = self.paths(va, vb, gap as usize) else {
                continue;
            };
            if paths.len() != 1 {
                continue;
            }
            let path = &paths[0];
            let mut starts = Vec::with_capacity(path.len());
            let mut s = start_a;
            for &v in path {
                starts.push(s);
                s += self.len(v) as isize;
            }
            for (q, &hit) in hits.iter().enumerate().take(j).skip(i + 1) {
                let qi = q as isize;
                let at = starts
                    .iter()
                    .rposition(|&st| st <= qi)
                    .expect("first node starts before q");
                let p = (qi - starts[at]) as usize;
                let v = path[at];
                if p + k <= self.len(v) && self.matches(hit, v, p) {
                    out.rescued.push(v.node as u32);
                }
            }
            for e in path.windows(2) {
                out.transitions.push(Edge::new(e[0], e[1]).canonical());
            }
        }
        out
    }
}

/// Counts k-mer hits of all reads on the graph's nodes and edges. Reads are
/// processed in parallel and merged in read order.
pub fn annotate_reads(reads: &[Read], idx: &KmerIndex, g: &AnnotatedGraph) -> NodeHits {
    let a = Annotator { idx, g };
    let per_read: Vec<ReadHits> = reads.par_iter().map(|r| a.annotate(r.sequence.as_bytes())).collect();
    let mut hits = NodeHits::new(g.num_nodes());
    for r in per_read {
        hits.absorb(r);
    }
    hits.expected_unique = idx.expected_unique.clone();
    hits
}

/// Copies hit counts onto the graph: `KC` is the sum of unique and rescued
/// hits, every edge's `EC` its transition count (zero when absent), `ue`
/// the index's expected unique k-mers when recorded.
pub fn apply_annotation(g: &AnnotatedGraph, hits: &NodeHits) -> Result<AnnotatedGraph, KmerError> {
    let n = g.num_nodes();
    if hits.unique.len() > n || hits.rescued.len() > n || hits.expected_unique.len() > n {
        return Err(KmerError::UnknownNode(n));
    }
    let mut out = g.clone();
    for (e, _) in g.edges() {
        out.set_edge_count(e, 0);
    }
    for v in 0..n {
        let count = hits.unique.get(v).copied().unwrap_or(0) + hits.rescued.get(v).copied().unwrap_or(0);
        out.set_kmer_count(v, count, hits.expected_unique.get(v).copied());
    }
    for (&e, &c) in &hits.transitions {
        if e.from.node >= n || e.to.node >= n {
            return Err(KmerError::UnknownNode(e.from.node.max(e.to.node)));
        }
        if !out.set_edge_count(e, c) {
            return Err(KmerError::UnknownEdge(format!(
                "{}{} -> {}{}",
                g.node(e.from.node).id,
                e.from.orient,
                g.node(e.to.node).id,
                e.to.orient
            )));
        }
    }
    Ok(out)
}

/// Builds the index, annotates the reads and applies the counts.
pub fn annotate_graph(
    g: &AnnotatedGraph,
    reads: &[Read],
    k: usize,
    variants: Option<&BTreeMap<String, Vec<String>>>,
) -> Result<AnnotatedGraph, KmerError> {
    let idx = KmerIndex::build(g, k, variants)?;
    let hits = annotate_reads(reads, &idx, g);
    apply_annotation(g, &hits)
}

/// Annotates at several k and keeps, per node, the k giving the highest
/// depth estimate; edge counts take the maximum over k.
pub fn annotate_graph_multi_k(
    g: &AnnotatedGraph,
    reads: &[Read],
    ks: &[usize],
    variants: Option<&BTreeMap<String, Vec<String>>>,
) -> Result<AnnotatedGraph, KmerError> {
    let mut best: Option<AnnotatedGraph> = None;
    let mut best_depth = vec![f64::NEG_INFINITY; g.num_nodes()];
    for &k in ks {
        let longest = g.nodes().iter().map(|n| n.len()).max().unwrap_or(0);
        if k > longest {
            continue;
        }
        let at_k = annotate_graph(g, reads, k, variants)?;
        let out = best.get_or_insert_with(|| at_k.clone());
        for v in 0..g.num_nodes() {
            let n = at_k.node(v);
            let denom = match n.expected_unique {
                Some(u) if u > 0 => u,
                _ => (n.len() + 1).saturating_sub(k).max(1) as u64,
            };
            let depth = n.kmer_count as f64 / denom as f64;
            if depth > best_depth[v] {
                best_depth[v] = depth;
                out.set_kmer_count(v, n.kmer_count, Some(denom));
            }
        }
        for (e, c) in at_k.edges() {
            let cur = out.edge_count(e.from, e.to).unwrap_or(0);
            out.set_edge_count(e, cur.max(c));
        }
    }
    best.ok_or(KmerError::EmptyIndex {
        k: ks.iter().copied().min().unwrap_or(0),
        longest: g.nodes().iter().map(|n| n.len()).max().unwrap_or(0),
    })
}

/// Parses `node id <TAB> sequence` lines into per-node variant lists.
pub fn parse_nodeseq(text: &str) -> Result<BTreeMap<String, Vec<String>>, KmerError> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(id), Some(seq), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(KmerError::NodeSeq {
                line: i + 1,
                message: "expected two tab-separated fields".into(),
            });
        };
        if seq.is_empty() || !seq.bytes().all(|b| b"ACGTNacgtn".contains(&b)) {
            return Err(KmerError::NodeSeq {
                line: i + 1,
                message: format!("invalid sequence for `{id}`"),
            });
        }
        out.entry(id.to_string()).or_default().push(seq.to_ascii_uppercase());
    }
    Ok(out)
}

pub fn write_nodeseq(variants: &BTreeMap<String, Vec<String>>) -> String {
    let mut s = String::new();
    for (id, seqs) in variants {
        for seq in seqs {
            s.push_str(id);
            s.push('\t');
            s.push_str(seq);
            s.push('\n');
        }
    }
    s
}
