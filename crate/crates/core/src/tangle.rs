//! Walks and the copy-number objectives they are scored by.
//!
//! For a walk `W` and copy numbers `w(v)`:
//!
//! - tangle: `sum_v (#W(v) - w(v))^2`, orientation ignored, steps must follow
//!   forward edges `(u,+) -> (v,+)`
//! - oriented: `sum_v (#W(v+) + #W(v-) - w(v))^2` on the oriented edge set
//! - diploid: as oriented, with the visits of two walks added together
//! - length weighted: tangle cost with each term scaled by `ln L(v)`
//!
//! These functions are the reference semantics the QUBO encodings and the
//! solvers are tested against.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gfa::OrientedPath;
use crate::graph::{AnnotatedGraph, Visit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("walk {walk} visits unknown node index {node} at step {index}")]
    UnknownNode { walk: usize, index: usize, node: usize },
    #[error("walk {walk} leaves the graph at step {index}")]
    Invalid { walk: usize, index: usize },
    #[error("node `{id}` has length {len}; the length-weighted cost needs at least 2")]
    ShortNode { id: String, len: usize },
    #[error("unknown node id `{0}` in path")]
    UnknownId(String),
}

/// Which of the three objectives a walk is scored under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Tangle,
    Oriented,
    Diploid,
}

impl ProblemKind {
    pub fn paths(self) -> usize {
        match self {
            ProblemKind::Diploid => 2,
            _ => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Tangle => "tangle",
            ProblemKind::Oriented => "oriented",
            ProblemKind::Diploid => "diploid",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tangle" => Ok(ProblemKind::Tangle),
            "oriented" => Ok(ProblemKind::Oriented),
            "diploid" => Ok(ProblemKind::Diploid),
            other => Err(format!("unknown problem kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Walk {
    pub visits: Vec<Visit>,
}

impl Walk {
    pub fn new(visits: Vec<Visit>) -> Self {
        Self { visits }
    }

    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    /// The same walk read along the opposite strand.
    pub fn reverse_complement(&self) -> Walk {
        Walk::new(self.visits.iter().rev().map(|v| v.flip()).collect())
    }

    pub fn to_path(&self, g: &AnnotatedGraph) -> OrientedPath {
        OrientedPath::new(
            self.visits
                .iter()
                .map(|v| (g.node(v.node).id.clone(), v.orient))
                .collect(),
        )
    }

    pub fn from_path(g: &AnnotatedGraph, path: &OrientedPath) -> Result<Walk, WalkError> {
        let visits = path
            .steps
            .iter()
            .map(|(id, o)| {
                g.node_index(id)
                    .map(|n| Visit::new(n, *o))
                    .ok_or_else(|| WalkError::UnknownId(id.clone()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Walk::new(visits))
    }
}

impl From<Vec<Visit>> for Walk {
    fn from(visits: Vec<Visit>) -> Self {
        Walk::new(visits)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WalkPair {
    pub first: Walk,
    pub second: Walk,
}

impl WalkPair {
    pub fn new(first: Walk, second: Walk) -> Self {
        Self { first, second }
    }
}

fn check_nodes(g: &AnnotatedGraph, w: &Walk, walk: usize) -> Result<(), WalkError> {
    for (index, v) in w.visits.iter().enumerate() {
        if v.node >= g.num_nodes() {
            return Err(WalkError::UnknownNode {
                walk,
                index,
                node: v.node,
            });
        }
    }
    Ok(())
}

/// Index of the first visit not reachable from its predecessor on the
/// oriented graph, or `None` for a valid walk.
pub fn first_violation(g: &AnnotatedGraph, w: &Walk) -> Result<Option<usize>, WalkError> {
    check_nodes(g, w, 0)?;
    Ok(w.visits.windows(2).position(|p| !g.has_edge(p[0], p[1])).map(|i| i + 1))
}

/// Same as [`first_violation`] for the unoriented view: orientations are
/// ignored and a step `u -> v` needs the edge `(u,+) -> (v,+)`.
pub fn first_tangle_violation(g: &AnnotatedGraph, w: &Walk) -> Result<Option<usize>, WalkError> {
    check_nodes(g, w, 0)?;
    Ok(w.visits
        .windows(2)
        .position(|p| !g.has_forward_edge(p[0].node, p[1].node))
        .map(|i| i + 1))
}

pub fn is_valid_walk(g: &AnnotatedGraph, w: &Walk) -> Result<bool, WalkError> {
    Ok(first_violation(g, w)?.is_none())
}

/// Number of visits per node, both orientations together.
pub fn visit_counts(g: &AnnotatedGraph, walks: &[&Walk]) -> Vec<u64> {
    let mut counts = vec![0u64; g.num_nodes()];
    for w in walks {
        for v in &w.visits {
            counts[v.node] += 1;
        }
    }
    counts
}

fn deviation_cost(g: &AnnotatedGraph, counts: &[u64], scale: impl Fn(usize) -> f64) -> f64 {
    g.nodes()
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(i, (n, &c))| {
            let d = c as f64 - n.weight;
            scale(i) * d * d
        })
        .sum()
}

fn require_tangle_valid(g: &AnnotatedGraph, w: &Walk) -> Result<(), WalkError> {
    match first_tangle_violation(g, w)? {
        Some(index) => Err(WalkError::Invalid { walk: 0, index }),
        None => Ok(()),
    }
}

fn require_valid(g: &AnnotatedGraph, w: &Walk, walk: usize) -> Result<(), WalkError> {
    check_nodes(g, w, walk)?;
    match first_violation(g, w)? {
        Some(index) => Err(WalkError::Invalid { walk, index }),
        None => Ok(()),
    }
}

pub fn cost_tangle(g: &AnnotatedGraph, w: &Walk) -> Result<f64, WalkError> {
    require_tangle_valid(g, w)?;
    Ok(deviation_cost(g, &visit_counts(g, &[w]), |_| 1.0))
}

pub fn cost_oriented(g: &AnnotatedGraph, w: &Walk) -> Result<f64, WalkError> {
    require_valid(g, w, 0)?;
    Ok(deviation_cost(g, &visit_counts(g, &[w]), |_| 1.0))
}

pub fn cost_diploid(g: &AnnotatedGraph, p: &WalkPair) -> Result<f64, WalkError> {
    require_valid(g, &p.first, 0)?;
    require_valid(g, &p.second, 1)?;
    Ok(deviation_cost(g, &visit_counts(g, &[&p.first, &p.second]), |_| 1.0))
}

/// Tangle cost with each node's term weighted by the natural log of its
/// sequence length.
pub fn cost_length_weighted(g: &AnnotatedGraph, w: &Walk) -> Result<f64, WalkError> {
    if let Some(n) = g.nodes().iter().find(|n| n.len() < 2) {
        return Err(WalkError::ShortNode {
            id: n.id.clone(),
            len: n.len(),
        });
    }
    require_tangle_valid(g, w)?;
    Ok(deviation_cost(g, &visit_counts(g, &[w]), |i| {
        (g.node(i).len() as f64).ln()
    }))
}

/// Cost of one or two walks under `kind`. Diploid expects two walks, the
/// other kinds exactly one.
pub fn cost(g: &AnnotatedGraph, kind: ProblemKind, walks: &[Walk]) -> Result<f64, WalkError> {
    match kind {
        ProblemKind::Tangle => cost_tangle(g, &walks[0]),
        ProblemKind::Oriented => cost_oriented(g, &walks[0]),
        ProblemKind::Diploid => cost_diploid(g, &WalkPair::new(walks[0].clone(), walks[1].clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(weights: &[f64], lens: &[usize], edges: &[(Visit, Visit)]) -> AnnotatedGraph {
        let mut g = AnnotatedGraph::new(2);
        for (i, len) in lens.iter().enumerate() {
            g.add_node(format!("n{i}"), "A".repeat(*len)).unwrap();
        }
        g.set_weights(weights);
        for (a, b) in edges {
            g.add_edge(*a, *b, 0);
        }
        g
    }

    fn fwd(ids: &[usize]) -> Walk {
        Walk::new(ids.iter().map(|&i| Visit::fwd(i)).collect())
    }

    #[test]
    fn validity() {
        let (a, b, c) = (0, 1, 2);
        let g = graph(&[1.0; 3], &[4; 3], &[(Visit::fwd(a), Visit::fwd(b))]);
        assert_eq!(first_violation(&g, &Walk::default()), Ok(None));
        assert_eq!(first_violation(&g, &fwd(&[a, b])), Ok(None));
        assert_eq!(first_violation(&g, &fwd(&[a, c])), Ok(Some(1)));
        assert!(matches!(
            first_violation(&g, &fwd(&[a, 9])),
            Err(WalkError::UnknownNode { node: 9, .. })
        ));
        // The mirror edge makes (b,-) -> (a,-) valid.
        assert!(is_valid_walk(&g, &Walk::new(vec![Visit::rev(b), Visit::rev(a)])).unwrap());
    }

    #[test]
    fn tangle_cost_examples() {
        let g = graph(&[2.0], &[4], &[(Visit::fwd(0), Visit::fwd(0))]);
        assert_eq!(cost_tangle(&g, &fwd(&[0, 0])), Ok(0.0));
        assert_eq!(cost_tangle(&g, &fwd(&[0])), Ok(1.0));

        let (a, b, c) = (0, 1, 2);
        let g = graph(
            &[1.0, 2.0, 1.0],
            &[4; 3],
            &[
                (Visit::fwd(a), Visit::fwd(b)),
                (Visit::fwd(b), Visit::fwd(c)),
                (Visit::fwd(c), Visit::fwd(b)),
            ],
        );
        assert_eq!(cost_tangle(&g, &fwd(&[a, b, c, b])), Ok(0.0));
        assert!(matches!(
            cost_tangle(&g, &fwd(&[a, c])),
            Err(WalkError::Invalid { index: 1, .. })
        ));
    }

    /// Brute-force minimum of the tangle cost over all walks of length <= 4.
    #[test]
    fn tangle_example_minimum_is_zero_by_enumeration() {
        let (a, b, c) = (0, 1, 2);
        let g = graph(
            &[1.0, 2.0, 1.0],
            &[4; 3],
            &[
                (Visit::fwd(a), Visit::fwd(b)),
                (Visit::fwd(b), Visit::fwd(c)),
                (Visit::fwd(c), Visit::fwd(b)),
            ],
        );
        let mut best = f64::INFINITY;
        let mut zero_walks = 0;
        for len in 0..=4u32 {
            for code in 0..3usize.pow(len) {
                let ids: Vec<usize> = (0..len).map(|i| code / 3usize.pow(i) % 3).collect();
                if let Ok(c) = cost_tangle(&g, &fwd(&ids)) {
                    best = best.min(c);
                    if c == 0.0 {
                        zero_walks += 1;
                    }
                }
            }
        }
        assert_eq!(best, 0.0);
        assert_eq!(zero_walks, 1);
    }

    #[test]
    fn oriented_and_diploid_examples() {
        let g = graph(&[2.0], &[4], &[(Visit::fwd(0), Visit::rev(0))]);
        assert_eq!(
            cost_oriented(&g, &Walk::new(vec![Visit::fwd(0), Visit::rev(0)])),
            Ok(0.0)
        );
        let g1 = graph(&[1.0], &[4], &[]);
        assert_eq!(cost_oriented(&g1, &fwd(&[0])), Ok(0.0));
        let g2 = graph(&[1.0, 1.0], &[4, 4], &[]);
        assert_eq!(cost_oriented(&g2, &Walk::default()), Ok(2.0));

        let single = graph(&[2.0], &[4], &[]);
        let pair = WalkPair::new(fwd(&[0]), fwd(&[0]));
        assert_eq!(cost_diploid(&single, &pair), Ok(0.0));
        let w = fwd(&[0]);
        assert_eq!(
            cost_diploid(&single, &WalkPair::new(w.clone(), Walk::default())),
            cost_oriented(&single, &w)
        );
        let two = graph(&[2.0, 2.0], &[4, 4], &[]);
        assert_eq!(cost_diploid(&two, &WalkPair::default()), Ok(8.0));
        let bad = WalkPair::new(Walk::default(), fwd(&[0, 1]));
        assert_eq!(cost_diploid(&two, &bad), Err(WalkError::Invalid { walk: 1, index: 1 }));
    }

    #[test]
    fn length_weighted_examples() {
        let g = graph(&[2.0, 1.0], &[100, 10], &[]);
        let c = cost_length_weighted(&g, &Walk::default()).unwrap();
        assert!((c - (4.0 * 100f64.ln() + 10f64.ln())).abs() < 1e-12);
        // Visiting each once leaves a deficit of one on the first node only.
        let g = graph(&[2.0, 1.0], &[100, 10], &[(Visit::fwd(0), Visit::fwd(1))]);
        let c = cost_length_weighted(&g, &fwd(&[0, 1])).unwrap();
        assert!((c - 100f64.ln()).abs() < 1e-12);
        let g2 = graph(&[2.0, 1.0], &[2, 2], &[(Visit::fwd(0), Visit::fwd(1))]);
        let w = fwd(&[0, 1]);
        let lw = cost_length_weighted(&g2, &w).unwrap();
        assert!((lw - 2f64.ln() * cost_tangle(&g2, &w).unwrap()).abs() < 1e-12);
        let perfect = graph(&[1.0, 1.0], &[7, 300], &[(Visit::fwd(0), Visit::fwd(1))]);
        assert_eq!(cost_length_weighted(&perfect, &fwd(&[0, 1])), Ok(0.0));
        let short = graph(&[1.0], &[1], &[]);
        assert!(matches!(
            cost_length_weighted(&short, &Walk::default()),
            Err(WalkError::ShortNode { .. })
        ));
    }

    #[test]
    fn reverse_complement_walk_has_equal_cost() {
        let g = graph(
            &[1.0, 2.0],
            &[4, 4],
            &[(Visit::fwd(0), Visit::fwd(1)), (Visit::fwd(1), Visit::rev(1))],
        );
        let w = Walk::new(vec![Visit::fwd(0), Visit::fwd(1), Visit::rev(1)]);
        let r = w.reverse_complement();
        assert!(is_valid_walk(&g, &r).unwrap());
        assert_eq!(cost_oriented(&g, &w), cost_oriented(&g, &r));
    }
}
