//! QUBO encodings of the walk problems.
//!
//! Variables are laid out as `x[p][t][s]`: path `p`, time step `t` and slot
//! `s`, flattened to `p*T*S + t*S + s`. Slots are the nodes (unoriented
//! problem) or oriented visits `2*node + orientation`, followed by one end
//! slot. The model is the sum of
//!
//! - a one-hot term `L1 * (sum_s x[p][t][s] - 1)^2` for every path and step,
//! - a transition term `L2` for every consecutive pair of real slots that is
//!   not an edge and for every step leaving the end slot,
//! - the copy-number term `(sum x over visits of v - w(v))^2` with `w`
//!   rounded to integers.
//!
//! Every term is a non-negative square or penalty, so every model built here
//! has minimum energy at least zero, and a valid walk encodes to energy equal
//! to its cost.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{AnnotatedGraph, Visit};
use crate::tangle::{ProblemKind, Walk};

pub const DEFAULT_ALPHA: f64 = 1.2;
pub const DEFAULT_LAMBDA1: f64 = 10.0;
pub const DEFAULT_LAMBDA2: f64 = 5.0;

/// One assignment, one byte per variable holding 0 or 1.
pub type Bits = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuboError {
    #[error("node `{0}` has a non-finite weight")]
    NonFiniteWeight(String),
    #[error("rounded weights sum to zero; nothing to encode")]
    NothingToEncode,
    #[error("alpha must be finite and positive, got {0}")]
    BadAlpha(f64),
    #[error("assignment has {got} bits, model has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("walk of length {len} does not fit horizon {horizon}")]
    WalkTooLong { len: usize, horizon: usize },
    #[error("expected {expected} walks for this layout, got {got}")]
    WalkCount { expected: usize, got: usize },
    #[error("walk visits node {node}, layout has {nodes} nodes")]
    UnknownNode { node: usize, nodes: usize },
    #[error("model text line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Mapping between `(path, time, slot)` and flat variable indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableLayout {
    pub kind: ProblemKind,
    pub horizon: usize,
    pub alpha: f64,
    pub node_ids: Vec<String>,
}

/// What a slot at one time step stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Node(Visit),
    End,
}

impl VariableLayout {
    pub fn new(kind: ProblemKind, horizon: usize, alpha: f64, node_ids: Vec<String>) -> Self {
        Self {
            kind,
            horizon,
            alpha,
            node_ids,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn paths(&self) -> usize {
        self.kind.paths()
    }

    /// Slots per time step, end slot included.
    pub fn slots_per_step(&self) -> usize {
        match self.kind {
            ProblemKind::Tangle => self.num_nodes() + 1,
            _ => 2 * self.num_nodes() + 1,
        }
    }

    pub fn end_slot(&self) -> usize {
        self.slots_per_step() - 1
    }

    pub fn num_variables(&self) -> usize {
        self.paths() * self.horizon * self.slots_per_step()
    }

    pub fn index(&self, path: usize, t: usize, slot: usize) -> usize {
        let s = self.slots_per_step();
        path * self.horizon * s + t * s + slot
    }

    /// Inverse of [`VariableLayout::index`].
    pub fn position(&self, index: usize) -> (usize, usize, usize) {
        let s = self.slots_per_step();
        let block = self.horizon * s;
        (index / block, (index % block) / s, index % s)
    }

    pub fn slot(&self, slot: usize) -> Slot {
        if slot == self.end_slot() {
            Slot::End
        } else if self.kind == ProblemKind::Tangle {
            Slot::Node(Visit::fwd(slot))
        } else {
            Slot::Node(Visit::from_slot(slot))
        }
    }

    pub fn slot_of(&self, v: Visit) -> usize {
        match self.kind {
            ProblemKind::Tangle => v.node,
            _ => v.slot(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Horizon `max(2, ceil(alpha * sum_v round(w(v))))`.
pub fn horizon(weights: &[f64], alpha: f64) -> Result<usize, QuboError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(QuboError::BadAlpha(alpha));
    }
    let total: f64 = weights.iter().map(|w| w.round_ties_even()).sum();
    if total < 1.0 {
        return Err(QuboError::NothingToEncode);
    }
    // Guard against products such as 1.2 * 5 landing just above an integer.
    Ok(((alpha * total - 1e-9).ceil() as usize).max(2))
}

/// Sparse quadratic model `offset + sum_i a_i x_i + sum_{i<j} b_ij x_i x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    pub n: usize,
    pub linear: Vec<f64>,
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub layout: Option<VariableLayout>,
}

/// Row-wise view of the couplings, symmetric: each pair appears under both
/// of its indices.
#[derive(Debug, Clone)]
pub struct Couplings {
    start: Vec<usize>,
    index: Vec<u32>,
    weight: Vec<f64>,
}

impl Couplings {
    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.start[i], self.start[i + 1]);
        (&self.index[a..b], &self.weight[a..b])
    }
}

impl QuboModel {
    /// Model with no terms over `n` variables.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            linear: vec![0.0; n],
            quadratic: BTreeMap::new(),
            offset: 0.0,
            lambda1: 0.0,
            lambda2: 0.0,
            layout: None,
        }
    }

    pub fn add_linear(&mut self, i: usize, c: f64) {
        self.linear[i] += c;
    }

    /// Adds `c * x_i * x_j`; `i == j` folds into the linear term.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: f64) {
        if i == j {
            self.linear[i] += c;
            return;
        }
        let key = (i.min(j), i.max(j));
        *self.quadratic.entry(key).or_insert(0.0) += c;
    }

    /// Zero-valued coefficients are dropped.
    fn prune(&mut self) {
        self.quadratic.retain(|_, c| *c != 0.0);
    }

    pub fn kind(&self) -> Option<ProblemKind> {
        self.layout.as_ref().map(|l| l.kind)
    }

    /// A value no assignment can go below, when one is known: zero for
    /// models built from a graph.
    pub fn energy_floor(&self) -> Option<f64> {
        self.layout.as_ref().map(|_| 0.0)
    }

    pub fn energy(&self, x: &[u8]) -> Result<f64, QuboError> {
        if x.len() != self.n {
            return Err(QuboError::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.energy_unchecked(x))
    }

    pub fn energy_unchecked(&self, x: &[u8]) -> f64 {
        let mut e = self.offset;
        for (i, &a) in self.linear.iter().enumerate() {
            if x[i] != 0 {
                e += a;
            }
        }
        for (&(i, j), &b) in &self.quadratic {
            if x[i] != 0 && x[j] != 0 {
                e += b;
            }
        }
        e
    }

    pub fn couplings(&self) -> Couplings {
        let mut degree = vec![0usize; self.n + 1];
        for &(i, j) in self.quadratic.keys() {
            degree[i + 1] += 1;
            degree[j + 1] += 1;
        }
        for i in 0..self.n {
            degree[i + 1] += degree[i];
        }
        let start = degree;
        let mut fill = start.clone();
        let total = start[self.n];
        let mut index = vec![0u32; total];
        let mut weight = vec![0.0; total];
        for (&(i, j), &b) in &self.quadratic {
            index[fill[i]] = j as u32;
            weight[fill[i]] = b;
            fill[i] += 1;
            index[fill[j]] = i as u32;
            weight[fill[j]] = b;
            fill[j] += 1;
        }
        Couplings { start, index, weight }
    }

    /// Sparse text form: `key value` header lines followed by `i j coeff`
    /// lines, `i == j` for linear terms.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kind = self.kind().map_or("generic", |k| k.as_str());
        let horizon = self.layout.as_ref().map_or(0, |l| l.horizon);
        let _ = writeln!(s, "# qtangle qubo");
        let _ = writeln!(s, "n {}", self.n);
        let _ = writeln!(s, "offset {}", self.offset);
        let _ = writeln!(s, "lambda1 {}", self.lambda1);
        let _ = writeln!(s, "lambda2 {}", self.lambda2);
        let _ = writeln!(s, "kind {kind}");
        let _ = writeln!(s, "horizon {horizon}");
        for (i, &a) in self.linear.iter().enumerate() {
            if a != 0.0 {
                let _ = writeln!(s, "{i} {i} {a}");
            }
        }
        for (&(i, j), &b) in &self.quadratic {
            let _ = writeln!(s, "{i} {j} {b}");
        }
        s
    }

    /// Parses [`QuboModel::to_text`] output. The variable layout is not part
    /// of the text; attach it with `layout` (usually read from its JSON).
    pub fn from_text(text: &str, layout: Option<VariableLayout>) -> Result<Self, QuboError> {
        let err = |line: usize, message: String| QuboError::Parse { line, message };
        let mut header: HashMap<&str, &str> = HashMap::new();
        let mut terms = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = l.split_whitespace().collect();
            match parts.as_slice() {
                [key, value] => {
                    header.insert(key, value);
                }
                [i, j, c] => {
                    let i: usize = i.parse().map_err(|e| err(line, format!("index: {e}")))?;
                    let j: usize = j.parse().map_err(|e| err(line, format!("index: {e}")))?;
                    let c: f64 = c.parse().map_err(|e| err(line, format!("coefficient: {e}")))?;
                    terms.push((line, i, j, c));
                }
                _ => return Err(err(line, format!("cannot parse `{l}`"))),
            }
        }
        let get = |key: &str| -> Result<f64, QuboError> {
            header
                .get(key)
                .ok_or_else(|| err(0, format!("missing header `{key}`")))?
                .parse::<f64>()
                .map_err(|e| err(0, format!("header `{key}`: {e}")))
        };
        let n: usize = header
            .get("n")
            .ok_or_else(|| err(0, "missing header `n`".into()))?
            .parse()
            .map_err(|e| err(0, format!("header `n`: {e}")))?;
        let mut m = QuboModel::new(n);
        m.offset = get("offset")?;
        m.lambda1 = get("lambda1").unwrap_or(0.0);
        m.lambda2 = get("lambda2").unwrap_or(0.0);
        for (line, i, j, c) in terms {
            if i >= n || j >= n {
                return Err(err(line, format!("index out of range for n = {n}")));
            }
            m.add_quadratic(i, j, c);
        }
        if let Some(l) = &layout {
            if l.num_variables() != n {
                return Err(err(0, format!("layout has {} variables, model {n}", l.num_variables())));
            }
        }
        m.layout = layout;
        Ok(m)
    }
}

fn rounded_weights(g: &AnnotatedGraph) -> Result<Vec<f64>, QuboError> {
    g.nodes()
        .iter()
        .map(|n| {
            if n.weight.is_finite() {
                Ok(n.weight.round_ties_even())
            } else {
                Err(QuboError::NonFiniteWeight(n.id.clone()))
            }
        })
        .collect()
}

fn build(
    g: &AnnotatedGraph,
    kind: ProblemKind,
    alpha: f64,
    lambda1: f64,
    lambda2: f64,
) -> Result<QuboModel, QuboError> {
    let weights = rounded_weights(g)?;
    let t_max = horizon(&weights, alpha)?;
    let layout = VariableLayout::new(kind, t_max, alpha, g.nodes().iter().map(|n| n.id.clone()).collect());
    let mut m = QuboModel::new(layout.num_variables());
    m.lambda1 = lambda1;
    m.lambda2 = lambda2;
    let s = layout.slots_per_step();
    let end = layout.end_slot();

    // Which slot pairs (a at t, b at t+1) are penalised.
    let mut forbidden = vec![false; s * s];
    for a in 0..s {
        for b in 0..end {
            forbidden[a * s + b] = match (layout.slot(a), layout.slot(b)) {
                (Slot::End, _) => true,
                (Slot::Node(u), Slot::Node(v)) => match kind {
                    ProblemKind::Tangle => !g.has_forward_edge(u.node, v.node),
                    _ => !g.has_edge(u, v),
                },
                (_, Slot::End) => false,
            };
        }
    }

    for p in 0..layout.paths() {
        for t in 0..t_max {
            // One-hot constraint.
            m.offset += lambda1;
            for a in 0..s {
                let i = layout.index(p, t, a);
                m.add_linear(i, -lambda1);
                for b in a + 1..s {
                    m.add_quadratic(i, layout.index(p, t, b), 2.0 * lambda1);
                }
            }
            if t + 1 < t_max {
                for a in 0..s {
                    for b in 0..s {
                        if forbidden[a * s + b] {
                            m.add_quadratic(layout.index(p, t, a), layout.index(p, t + 1, b), lambda2);
                        }
                    }
                }
            }
        }
    }

    // Copy-number term over all variables visiting each node.
    for (v, &w) in weights.iter().enumerate() {
        let slots: Vec<usize> = match kind {
            ProblemKind::Tangle => vec![v],
            _ => vec![Visit::fwd(v).slot(), Visit::rev(v).slot()],
        };
        let mut vars = Vec::new();
        for p in 0..layout.paths() {
            for t in 0..t_max {
                vars.extend(slots.iter().map(|&a| layout.index(p, t, a)));
            }
        }
        m.offset += w * w;
        for (k, &i) in vars.iter().enumerate() {
            m.add_linear(i, 1.0 - 2.0 * w);
            for &j in &vars[k + 1..] {
                m.add_quadratic(i, j, 2.0);
            }
        }
    }
    m.prune();
    m.layout = Some(layout);
    Ok(m)
}

pub fn build_tangle_qubo(g: &AnnotatedGraph, alpha: f64, lambda1: f64, lambda2: f64) -> Result<QuboModel, QuboError> {
    build(g, ProblemKind::Tangle, alpha, lambda1, lambda2)
}

pub fn build_oriented_qubo(g: &AnnotatedGraph, alpha: f64, lambda1: f64, lambda2: f64) -> Result<QuboModel, QuboError> {
    build(g, ProblemKind::Oriented, alpha, lambda1, lambda2)
}

pub fn build_diploid_qubo(g: &AnnotatedGraph, alpha: f64, lambda1: f64, lambda2: f64) -> Result<QuboModel, QuboError> {
    build(g, ProblemKind::Diploid, alpha, lambda1, lambda2)
}

pub fn build_qubo(
    g: &AnnotatedGraph,
    kind: ProblemKind,
    alpha: f64,
    lambda1: f64,
    lambda2: f64,
) -> Result<QuboModel, QuboError> {
    build(g, kind, alpha, lambda1, lambda2)
}

/// Bits of a walk (one per path) placed from step 0, with the end slot set
/// at every remaining step.
pub fn encode_walk(layout: &VariableLayout, walks: &[Walk]) -> Result<Bits, QuboError> {
    if walks.len() != layout.paths() {
        return Err(QuboError::WalkCount {
            expected: layout.paths(),
            got: walks.len(),
        });
    }
    let mut x = vec![0u8; layout.num_variables()];
    for (p, w) in walks.iter().enumerate() {
        if w.len() > layout.horizon {
            return Err(QuboError::WalkTooLong {
                len: w.len(),
                horizon: layout.horizon,
            });
        }
        for t in 0..layout.horizon {
            let slot = match w.visits.get(t) {
                Some(v) if v.node >= layout.num_nodes() => {
                    return Err(QuboError::UnknownNode {
                        node: v.node,
                        nodes: layout.num_nodes(),
                    })
                }
                Some(v) => layout.slot_of(*v),
                None => layout.end_slot(),
            };
            x[layout.index(p, t, slot)] = 1;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tangle::{cost, ProblemKind::*};

    fn single(w: f64, self_loop: bool) -> AnnotatedGraph {
        let mut g = AnnotatedGraph::new(3);
        g.add_node("v", "ACGT").unwrap();
        g.set_weights(&[w]);
        if self_loop {
            g.add_edge(Visit::fwd(0), Visit::fwd(0), 1);
        }
        g
    }

    fn minimisers(m: &QuboModel) -> (f64, Vec<Bits>) {
        let mut best = f64::INFINITY;
        let mut at = Vec::new();
        for code in 0u64..1 << m.n {
            let x: Bits = (0..m.n).map(|i| ((code >> i) & 1) as u8).collect();
            let e = m.energy(&x).unwrap();
            if e < best {
                best = e;
                at.clear();
            }
            if e == best {
                at.push(x);
            }
        }
        (best, at)
    }

    #[test]
    fn horizon_rule() {
        assert_eq!(horizon(&[1.0], 1.2), Ok(2));
        assert_eq!(horizon(&[2.0, 3.0], 1.2), Ok(6));
        assert_eq!(horizon(&[0.5, 2.5], 1.2), Ok(3));
        assert_eq!(horizon(&[0.4], 1.2), Err(QuboError::NothingToEncode));
        assert_eq!(horizon(&[10.0], 1.25), Ok(13));
    }

    #[test]
    fn single_node_tangle_model() {
        let g = single(1.0, false);
        let m = build_tangle_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        assert_eq!(m.n, 4);
        let l = m.layout.as_ref().unwrap();
        let mut x = vec![0u8; 4];
        x[l.index(0, 0, 0)] = 1;
        x[l.index(0, 1, l.end_slot())] = 1;
        assert_eq!(m.energy(&x), Ok(0.0));
        assert_eq!(m.energy(&[0; 4]), Ok(21.0));
        let (best, at) = minimisers(&m);
        assert_eq!(best, 0.0);
        assert_eq!(at, vec![x]);
    }

    #[test]
    fn single_node_oriented_model() {
        let g = single(1.0, false);
        let m = build_oriented_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        assert_eq!(m.n, 6);
        let l = m.layout.clone().unwrap();
        let (best, at) = minimisers(&m);
        assert_eq!(best, 0.0);
        let expect: Vec<Bits> = [Visit::fwd(0), Visit::rev(0)]
            .iter()
            .map(|v| encode_walk(&l, &[Walk::new(vec![*v])]).unwrap())
            .collect();
        assert_eq!(at.len(), 2);
        for e in &expect {
            assert!(at.contains(e));
        }
    }

    #[test]
    fn oriented_transition_needs_the_oriented_edge() {
        let g = single(2.0, false);
        let m = build_oriented_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        let l = m.layout.clone().unwrap();
        let i = l.index(0, 0, Visit::fwd(0).slot());
        let j = l.index(0, 1, Visit::rev(0).slot());
        assert_eq!(m.quadratic.get(&(i, j)), Some(&7.0));
        let mut g2 = single(2.0, false);
        g2.add_edge(Visit::fwd(0), Visit::rev(0), 1);
        let m2 = build_oriented_qubo(&g2, 1.2, 10.0, 5.0).unwrap();
        assert_eq!(m2.quadratic.get(&(i, j)), Some(&2.0));
    }

    #[test]
    fn single_node_diploid_model() {
        let g = single(2.0, false);
        let m = build_diploid_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        let l = m.layout.clone().unwrap();
        assert_eq!(l.horizon, 3);
        assert_eq!(m.n, 2 * 3 * 3);
        let one = Walk::new(vec![Visit::fwd(0)]);
        let x = encode_walk(&l, &[one.clone(), one]).unwrap();
        assert_eq!(m.energy(&x), Ok(0.0));
        let (best, _) = minimisers(&m);
        assert_eq!(best, 0.0);
        let oriented = build_oriented_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        assert_eq!(m.n, 2 * oriented.n);
        // Pairs across the two path blocks come only from the copy-number term.
        let block = l.horizon * l.slots_per_step();
        for (&(i, j), &c) in &m.quadratic {
            if (i < block) != (j < block) {
                assert_eq!(c, 2.0);
                assert_ne!(l.position(i).2, l.end_slot());
                assert_ne!(l.position(j).2, l.end_slot());
            }
        }
    }

    #[test]
    fn energy_basics() {
        let mut m = QuboModel::new(2);
        m.add_quadratic(0, 1, 3.0);
        assert_eq!(m.energy(&[1, 1]), Ok(3.0));
        assert_eq!(m.energy(&[0, 0]), Ok(0.0));
        assert!(matches!(m.energy(&[1]), Err(QuboError::LengthMismatch { .. })));
        m.offset = 4.5;
        assert_eq!(m.energy(&[0, 0]), Ok(4.5));
    }

    #[test]
    fn encode_examples() {
        let mut g = AnnotatedGraph::new(3);
        g.add_node("a", "ACGT").unwrap();
        g.add_node("b", "ACGT").unwrap();
        g.set_weights(&[1.0, 1.0]);
        let m = build_tangle_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        let l = m.layout.unwrap();
        assert_eq!(l.horizon, 3);
        let x = encode_walk(&l, &[Walk::default()]).unwrap();
        let set: Vec<usize> = (0..x.len()).filter(|&i| x[i] == 1).collect();
        assert_eq!(set, vec![l.index(0, 0, 2), l.index(0, 1, 2), l.index(0, 2, 2)]);
        let x = encode_walk(&l, &[Walk::new(vec![Visit::fwd(0), Visit::fwd(1)])]).unwrap();
        let set: Vec<usize> = (0..x.len()).filter(|&i| x[i] == 1).collect();
        assert_eq!(set, vec![l.index(0, 0, 0), l.index(0, 1, 1), l.index(0, 2, 2)]);
        let long = Walk::new(vec![Visit::fwd(0); 4]);
        assert!(matches!(encode_walk(&l, &[long]), Err(QuboError::WalkTooLong { .. })));
    }

    #[test]
    fn text_and_layout_round_trip() {
        let mut g = AnnotatedGraph::new(3);
        g.add_node("a", "ACGT").unwrap();
        g.add_node("b", "ACGT").unwrap();
        g.add_edge(Visit::fwd(0), Visit::rev(1), 0);
        g.set_weights(&[1.0, 2.0]);
        for kind in [Tangle, Oriented, Diploid] {
            let m = build_qubo(&g, kind, 1.2, 10.0, 5.0).unwrap();
            let layout = VariableLayout::from_json(&m.layout.as_ref().unwrap().to_json()).unwrap();
            let back = QuboModel::from_text(&m.to_text(), Some(layout)).unwrap();
            assert_eq!(back, m);
        }
        assert!(matches!(
            QuboModel::from_text("n 2\noffset 0\n0 5 1\n", None),
            Err(QuboError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn encoded_walks_cost_their_objective() {
        let (a, b, c) = (0, 1, 2);
        let mut g = AnnotatedGraph::new(3);
        for id in ["a", "b", "c"] {
            g.add_node(id, "ACGT").unwrap();
        }
        g.set_weights(&[1.0, 2.0, 1.0]);
        g.add_edge(Visit::fwd(a), Visit::fwd(b), 1);
        g.add_edge(Visit::fwd(b), Visit::fwd(c), 1);
        g.add_edge(Visit::fwd(c), Visit::fwd(b), 1);
        let m = build_tangle_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        let l = m.layout.clone().unwrap();
        for ids in [vec![], vec![a, b, c, b], vec![b, c], vec![c, b, c, b, c]] {
            let w = Walk::new(ids.into_iter().map(Visit::fwd).collect());
            let x = encode_walk(&l, std::slice::from_ref(&w)).unwrap();
            assert_eq!(m.energy(&x).unwrap(), cost(&g, Tangle, &[w]).unwrap());
        }
    }
}
