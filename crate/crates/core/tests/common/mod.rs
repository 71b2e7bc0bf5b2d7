#![allow(dead_code)]

use proptest::test_runner::Config;
use qtangle::gfa::Orientation;
use qtangle::graph::{AnnotatedGraph, Visit};
use qtangle::tangle::{ProblemKind, Walk};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cases(n: u32) -> Config {
    Config {
        cases: n,
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dna(r: &mut impl Rng, len: usize) -> String {
    (0..len).map(|_| b"ACGT"[r.random_range(0..4)] as char).collect()
}

pub fn random_visit(r: &mut impl Rng, nodes: usize) -> Visit {
    let orient = if r.random_bool(0.5) {
        Orientation::Forward
    } else {
        Orientation::Reverse
    };
    Visit::new(r.random_range(0..nodes), orient)
}

/// Graph with `1..=max_nodes` nodes, integer weights in `0..=max_weight`
/// (at least one positive),
/// random oriented edges (self-loops included) and random sequences.
pub fn random_graph(r: &mut impl Rng, max_nodes: usize, max_weight: u32, edge_p: f64) -> AnnotatedGraph {
    let n = r.random_range(1..=max_nodes);
    let mut g = AnnotatedGraph::new(3);
    for i in 0..n {
        let len = r.random_range(1..=24);
        g.add_node(format!("n{i}"), random_dna(r, len)).unwrap();
    }
    let mut weights: Vec<f64> = (0..n).map(|_| r.random_range(0..=max_weight) as f64).collect();
    if weights.iter().all(|&w| w == 0.0) {
        weights[r.random_range(0..n)] = 1.0;
    }
    g.set_weights(&weights);
    for a in 0..2 * n {
        for b in 0..2 * n {
            if r.random_bool(edge_p) {
                g.add_edge(Visit::from_slot(a), Visit::from_slot(b), r.random_range(0..5));
            }
        }
    }
    g
}

/// Successors of `v` allowed by `kind`.
pub fn next_steps(g: &AnnotatedGraph, kind: ProblemKind, v: Visit) -> Vec<Visit> {
    match kind {
        ProblemKind::Tangle => (0..g.num_nodes())
            .filter(|&u| g.has_forward_edge(v.node, u))
            .map(Visit::fwd)
            .collect(),
        _ => g.successors(v).to_vec(),
    }
}

/// A random walk of length `0..=max_len` valid under `kind`.
pub fn random_walk(r: &mut impl Rng, g: &AnnotatedGraph, kind: ProblemKind, max_len: usize) -> Walk {
    let target = r.random_range(0..=max_len);
    let mut visits = Vec::with_capacity(target);
    if target == 0 {
        return Walk::default();
    }
    let first = match kind {
        ProblemKind::Tangle => Visit::fwd(r.random_range(0..g.num_nodes())),
        _ => random_visit(r, g.num_nodes()),
    };
    visits.push(first);
    while visits.len() < target {
        let next = next_steps(g, kind, *visits.last().unwrap());
        match next.choose(r) {
            Some(v) => visits.push(*v),
            None => break,
        }
    }
    Walk::new(visits)
}

pub fn walks_for(r: &mut impl Rng, g: &AnnotatedGraph, kind: ProblemKind, max_len: usize) -> Vec<Walk> {
    (0..kind.paths()).map(|_| random_walk(r, g, kind, max_len)).collect()
}

pub fn all_kinds() -> [ProblemKind; 3] {
    [ProblemKind::Tangle, ProblemKind::Oriented, ProblemKind::Diploid]
}
