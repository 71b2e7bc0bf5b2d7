//! Turning solver output back into walks and sequences.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{AnnotatedGraph, Visit};
use crate::qubo::{Slot, VariableLayout};
use crate::tangle::{ProblemKind, Walk};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    Strict,
    Repair,
}

impl std::str::FromStr for DecodeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(DecodeMode::Strict),
            "repair" => Ok(DecodeMode::Repair),
            other => Err(format!("unknown decode mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// No slot set at this step.
    EmptyTime,
    /// More than one slot set at this step.
    MultiSet,
    /// The step from the previous node is not an edge.
    NonEdge,
    /// A node follows the end slot.
    EndEscape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: usize,
    pub time: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("assignment has {got} bits, layout has {expected}")]
    LayoutMismatch { expected: usize, got: usize },
    #[error("layout has {layout} nodes, graph has {graph}")]
    GraphMismatch { layout: usize, graph: usize },
    #[error("{} constraint violation(s), first at path {} step {}: {:?}", .0.len(), .0[0].path, .0[0].time, .0[0].kind)]
    Violations(Vec<Violation>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub mode: DecodeMode,
    /// Valid walk segments per path. Strict decoding yields at most one.
    pub paths: Vec<Vec<Walk>>,
    pub violations: Vec<Violation>,
}

impl DecodeReport {
    pub fn segment_count(&self) -> usize {
        self.paths.iter().map(Vec::len).sum()
    }

    /// One walk per path: its only segment, or the empty walk. For repaired
    /// output with several segments use [`DecodeReport::segments`].
    pub fn walks(&self) -> Vec<Walk> {
        self.paths
            .iter()
            .map(|segs| segs.first().cloned().unwrap_or_default())
            .collect()
    }

    pub fn segments(&self) -> impl Iterator<Item = &Walk> {
        self.paths.iter().flatten()
    }
}

fn step_ok(g: &AnnotatedGraph, kind: ProblemKind, a: Visit, b: Visit) -> bool {
    match kind {
        ProblemKind::Tangle => g.has_forward_edge(a.node, b.node),
        _ => g.has_edge(a, b),
    }
}

/// Reads walks out of an assignment.
///
/// Strict mode fails on any broken constraint. Repair mode skips empty
/// steps, resolves steps with several slots set by picking the slot that
/// least increases the copy-number deviation (end slot counts as no change,
/// lowest slot wins ties), ends a segment at an end slot and starts a new one
/// at every step that is not an edge.
pub fn decode(
    g: &AnnotatedGraph,
    layout: &VariableLayout,
    x: &[u8],
    mode: DecodeMode,
) -> Result<DecodeReport, DecodeError> {
    if x.len() != layout.num_variables() {
        return Err(DecodeError::LayoutMismatch {
            expected: layout.num_variables(),
            got: x.len(),
        });
    }
    if layout.num_nodes() != g.num_nodes() {
        return Err(DecodeError::GraphMismatch {
            layout: layout.num_nodes(),
            graph: g.num_nodes(),
        });
    }
    let weights: Vec<f64> = g.weights().iter().map(|w| w.round_ties_even()).collect();
    let mut counts = vec![0.0; g.num_nodes()];
    let mut violations = Vec::new();
    let mut paths = Vec::new();
    let s = layout.slots_per_step();
    for p in 0..layout.paths() {
        let mut segments = Vec::new();
        let mut current: Vec<Visit> = Vec::new();
        let mut ended = false;
        for t in 0..layout.horizon {
            let set: Vec<usize> = (0..s).filter(|&a| x[layout.index(p, t, a)] != 0).collect();
            let mut flag = |kind| violations.push(Violation { path: p, time: t, kind });
            let slot = match set.len() {
                0 => {
                    flag(ViolationKind::EmptyTime);
                    continue;
                }
                1 => set[0],
                _ => {
                    flag(ViolationKind::MultiSet);
                    let increase = |a: usize| match layout.slot(a) {
                        Slot::End => 0.0,
                        Slot::Node(v) => 2.0 * (counts[v.node] - weights[v.node]) + 1.0,
                    };
                    let mut best = set[0];
                    for &a in &set[1..] {
                        if increase(a) < increase(best) {
                            best = a;
                        }
                    }
                    best
                }
            };
            match layout.slot(slot) {
                Slot::End => {
                    ended = true;
                    if !current.is_empty() {
                        segments.push(Walk::new(std::mem::take(&mut current)));
                    }
                }
                Slot::Node(v) => {
                    if ended {
                        flag(ViolationKind::EndEscape);
                        ended = false;
                    }
                    if let Some(&last) = current.last() {
                        if !step_ok(g, layout.kind, last, v) {
                            flag(ViolationKind::NonEdge);
                            segments.push(Walk::new(std::mem::take(&mut current)));
                        }
                    }
                    counts[v.node] += 1.0;
                    current.push(v);
                }
            }
        }
        if !current.is_empty() {
            segments.push(Walk::new(current));
        }
        paths.push(segments);
    }
    if mode == DecodeMode::Strict && !violations.is_empty() {
        return Err(DecodeError::Violations(violations));
    }
    Ok(DecodeReport {
        mode,
        paths,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssemblyError {
    #[error("node `{0}` has no sequence")]
    NoSequence(String),
    #[error("walk visits node index {0}, which is not in the graph")]
    UnknownNode(usize),
}

/// Concatenated node sequences along the walk, reverse-complemented on the
/// reverse strand.
pub fn extract_sequence(g: &AnnotatedGraph, w: &Walk) -> Result<String, AssemblyError> {
    let mut out = String::new();
    for v in &w.visits {
        if v.node >= g.num_nodes() {
            return Err(AssemblyError::UnknownNode(v.node));
        }
        let n = g.node(v.node);
        if n.sequence.is_empty() {
            return Err(AssemblyError::NoSequence(n.id.clone()));
        }
        out.push_str(&g.oriented_sequence(*v));
    }
    Ok(out)
}

/// `>id` / `<id` per visit, as in GAF path columns.
pub fn render_path_string(g: &AnnotatedGraph, w: &Walk) -> String {
    w.to_path(g).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dna::reverse_complement;
    use crate::qubo::{build_oriented_qubo, build_tangle_qubo, encode_walk};

    fn abc() -> AnnotatedGraph {
        let mut g = AnnotatedGraph::new(3);
        g.add_node("a", "AC").unwrap();
        g.add_node("b", "GT").unwrap();
        g.add_node("c", "AACG").unwrap();
        g.set_weights(&[1.0, 1.0, 1.0]);
        g.add_edge(Visit::fwd(0), Visit::fwd(1), 1);
        g
    }

    #[test]
    fn decode_inverts_encode() {
        let g = abc();
        let m = build_tangle_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        let l = m.layout.unwrap();
        let w = Walk::new(vec![Visit::fwd(0), Visit::fwd(1)]);
        let x = encode_walk(&l, std::slice::from_ref(&w)).unwrap();
        for mode in [DecodeMode::Strict, DecodeMode::Repair] {
            let r = decode(&g, &l, &x, mode).unwrap();
            assert_eq!(r.walks(), vec![w.clone()]);
            assert!(r.violations.is_empty());
            assert_eq!(r.segment_count(), 1);
        }
        let empty = encode_walk(&l, &[Walk::default()]).unwrap();
        let r = decode(&g, &l, &empty, DecodeMode::Strict).unwrap();
        assert_eq!(r.walks(), vec![Walk::default()]);
        assert_eq!(r.segment_count(), 0);
    }

    #[test]
    fn repair_splits_non_edge_jumps() {
        let g = abc();
        let m = build_tangle_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        let l = m.layout.unwrap();
        let x = encode_walk(&l, &[Walk::new(vec![Visit::fwd(0), Visit::fwd(2)])]).unwrap();
        let err = decode(&g, &l, &x, DecodeMode::Strict).unwrap_err();
        assert_eq!(
            err,
            DecodeError::Violations(vec![Violation {
                path: 0,
                time: 1,
                kind: ViolationKind::NonEdge
            }])
        );
        let r = decode(&g, &l, &x, DecodeMode::Repair).unwrap();
        assert_eq!(
            r.paths[0],
            vec![Walk::new(vec![Visit::fwd(0)]), Walk::new(vec![Visit::fwd(2)])]
        );
    }

    #[test]
    fn repair_handles_empty_multi_and_escape() {
        let g = abc();
        let m = build_tangle_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        let l = m.layout.unwrap();
        assert_eq!(l.horizon, 4);
        let mut x = vec![0u8; l.num_variables()];
        // t0: a and b set; a wins the tie on slot order.
        x[l.index(0, 0, 0)] = 1;
        x[l.index(0, 0, 1)] = 1;
        // t1: nothing. t2: end. t3: b.
        x[l.index(0, 2, l.end_slot())] = 1;
        x[l.index(0, 3, 1)] = 1;
        let r = decode(&g, &l, &x, DecodeMode::Repair).unwrap();
        let kinds: Vec<ViolationKind> = r.violations.iter().map(|v| v.kind).collect();
        assert_eq!(
            kinds,
            vec![
                ViolationKind::MultiSet,
                ViolationKind::EmptyTime,
                ViolationKind::EndEscape
            ]
        );
        assert_eq!(
            r.paths[0],
            vec![Walk::new(vec![Visit::fwd(0)]), Walk::new(vec![Visit::fwd(1)])]
        );
        assert!(matches!(
            decode(&g, &l, &x[1..], DecodeMode::Repair),
            Err(DecodeError::LayoutMismatch { .. })
        ));
    }

    #[test]
    fn repair_prefers_undercovered_node() {
        let g = abc();
        let m = build_oriented_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        let l = m.layout.unwrap();
        let mut x = encode_walk(&l, &[Walk::new(vec![Visit::fwd(0), Visit::fwd(1)])]).unwrap();
        // Step 2 also carries (a,+) and (c,-); a is already used up, c is not.
        x[l.index(0, 2, l.end_slot())] = 0;
        x[l.index(0, 2, Visit::fwd(0).slot())] = 1;
        x[l.index(0, 2, Visit::rev(2).slot())] = 1;
        let r = decode(&g, &l, &x, DecodeMode::Repair).unwrap();
        assert_eq!(r.paths[0][1], Walk::new(vec![Visit::rev(2)]));
    }

    #[test]
    fn sequences() {
        let mut g = AnnotatedGraph::new(3);
        g.add_node("a", "ACG").unwrap();
        let w = Walk::new(vec![Visit::fwd(0)]);
        assert_eq!(extract_sequence(&g, &w).unwrap(), "ACG");
        let g = abc();
        assert_eq!(extract_sequence(&g, &Walk::new(vec![Visit::rev(2)])).unwrap(), "CGTT");
        let w = Walk::new(vec![Visit::fwd(0), Visit::rev(1)]);
        assert_eq!(extract_sequence(&g, &w).unwrap(), "ACAC");
        assert_eq!(
            extract_sequence(&g, &w.reverse_complement()).unwrap(),
            reverse_complement("ACAC").unwrap()
        );
        assert_eq!(
            extract_sequence(&g, &Walk::new(vec![Visit::fwd(7)])),
            Err(AssemblyError::UnknownNode(7))
        );
    }

    #[test]
    fn path_strings() {
        let g = abc();
        assert_eq!(
            render_path_string(&g, &Walk::new(vec![Visit::fwd(0), Visit::rev(1)])),
            ">a<b"
        );
        assert_eq!(render_path_string(&g, &Walk::default()), "");
    }
}
