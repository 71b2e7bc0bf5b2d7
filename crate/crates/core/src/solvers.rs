//! Exact and heuristic minimisers.
//!
//! Two exhaustive oracles (over walks and over bit assignments) and two
//! single-flip local searches (tabu and simulated annealing) that share
//! [`SolverParams`] and [`SolveResult`].

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{AnnotatedGraph, Visit};
use crate::qubo::{Bits, Couplings, QuboModel};
use crate::synth::keyed_rng;
use crate::tangle::{ProblemKind, Walk};

/// Largest model [`solve_exhaustive_bits`] accepts.
pub const MAX_EXHAUSTIVE_BITS: usize = 26;
/// Search-tree expansions [`solve_exhaustive_walks`] performs before giving up.
pub const DEFAULT_WALK_EXPANSIONS: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("{n} variables is too many for exhaustive enumeration (max {max})")]
    TooManyVariables { n: usize, max: usize },
    #[error("walk search exceeded {0} expansions")]
    SearchTooLarge(u64),
    #[error("invalid solver parameters: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub t_start: f64,
    pub t_end: f64,
    pub sweeps: u64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            t_start: 10.0,
            t_end: 0.05,
            sweeps: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Wall-clock budget in seconds, shared equally by the restarts.
    pub time_limit: f64,
    /// Total single-flip budget. When set, the wall clock is ignored and the
    /// result depends only on the model and the parameters.
    pub max_flips: Option<u64>,
    pub seed: u64,
    pub restarts: usize,
    /// Defaults to `max(10, n / 10)`.
    pub tabu_tenure: Option<usize>,
    pub anneal: AnnealSchedule,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            time_limit: 5.0,
            max_flips: None,
            seed: 0,
            restarts: 8,
            tabu_tenure: None,
            anneal: AnnealSchedule::default(),
        }
    }
}

impl SolverParams {
    pub fn with_flips(max_flips: u64, seed: u64) -> Self {
        Self {
            max_flips: Some(max_flips),
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::BadParams(m.to_string()));
        if !(self.time_limit > 0.0 && self.time_limit.is_finite()) {
            return bad("time_limit must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        if self.tabu_tenure == Some(0) {
            return bad("tabu_tenure must be positive");
        }
        let a = &self.anneal;
        if !(a.t_start > a.t_end && a.t_end > 0.0 && a.t_start.is_finite()) {
            return bad("anneal schedule needs t_start > t_end > 0");
        }
        if a.sweeps == 0 {
            return bad("anneal sweeps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub elapsed: f64,
    pub flips: u64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub solver: String,
    pub n: usize,
    #[serde(with = "hex_bits")]
    pub best_x: Bits,
    pub best_energy: f64,
    pub trace: Vec<TracePoint>,
    pub restarts_completed: usize,
    pub flips: u64,
    pub seed: u64,
}

impl SolveResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        let mut r: SolveResult = serde_json::from_str(s)?;
        r.best_x.truncate(r.n);
        Ok(r)
    }
}

/// Packs bits little-endian within each byte and writes them as hex.
pub fn pack_bits_hex(x: &[u8]) -> String {
    let mut bytes = vec![0u8; x.len().div_ceil(8)];
    for (i, &b) in x.iter().enumerate() {
        if b != 0 {
            bytes[i / 8] |= 1 << (i % 8);
        }
    }
    hex::encode(bytes)
}

/// Inverse of [`pack_bits_hex`], producing `8 * bytes` bits.
pub fn unpack_bits_hex(s: &str) -> Result<Bits, hex::FromHexError> {
    let bytes = hex::decode(s)?;
    Ok((0..bytes.len() * 8).map(|i| (bytes[i / 8] >> (i % 8)) & 1).collect())
}

mod hex_bits {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::pack_bits_hex(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        super::unpack_bits_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Local fields `h_i = a_i + sum_j b_ij x_j` so that flipping `i` changes
/// the energy by `(1 - 2 x_i) h_i`.
struct FlipState<'a> {
    couplings: &'a Couplings,
    x: Bits,
    field: Vec<f64>,
    energy: f64,
}

impl<'a> FlipState<'a> {
    fn new(m: &QuboModel, couplings: &'a Couplings, x: Bits) -> Self {
        let mut field = m.linear.clone();
        for (i, f) in field.iter_mut().enumerate() {
            let (idx, w) = couplings.row(i);
            for (&j, &b) in idx.iter().zip(w) {
                if x[j as usize] != 0 {
                    *f += b;
                }
            }
        }
        let energy = m.energy_unchecked(&x);
        Self {
            couplings,
            x,
            field,
            energy,
        }
    }

    #[inline]
    fn delta(&self, i: usize) -> f64 {
        if self.x[i] == 0 {
            self.field[i]
        } else {
            -self.field[i]
        }
    }

    #[inline]
    fn flip(&mut self, i: usize) {
        self.energy += self.delta(i);
        let sign = if self.x[i] == 0 { 1.0 } else { -1.0 };
        self.x[i] ^= 1;
        let (idx, w) = self.couplings.row(i);
        for (&j, &b) in idx.iter().zip(w) {
            self.field[j as usize] += sign * b;
        }
    }
}

/// Energy change from flipping bit `i` of `x`.
pub fn flip_delta(m: &QuboModel, couplings: &Couplings, x: &[u8], i: usize) -> f64 {
    let (idx, w) = couplings.row(i);
    let mut h = m.linear[i];
    for (&j, &b) in idx.iter().zip(w) {
        if x[j as usize] != 0 {
            h += b;
        }
    }
    if x[i] == 0 {
        h
    } else {
        -h
    }
}

/// Minimum energy, up to `keep` of its minimisers in Gray-code order, and the
/// total number of minimisers.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimisers {
    pub energy: f64,
    pub assignments: Vec<Bits>,
    pub count: u64,
}

fn check_size(m: &QuboModel) -> Result<(), SolverError> {
    if m.n > MAX_EXHAUSTIVE_BITS {
        return Err(SolverError::TooManyVariables {
            n: m.n,
            max: MAX_EXHAUSTIVE_BITS,
        });
    }
    Ok(())
}

/// Every assignment in Gray-code order, visiting `f(x, energy)`.
fn gray_walk(m: &QuboModel, mut f: impl FnMut(&[u8], f64)) {
    let couplings = m.couplings();
    let mut s = FlipState::new(m, &couplings, vec![0; m.n]);
    f(&s.x, s.energy);
    for k in 1u64..(1u64 << m.n) {
        s.flip(k.trailing_zeros() as usize);
        f(&s.x, s.energy);
    }
}

/// Tolerance for treating two energies as equal during enumeration.
fn energy_tolerance(e: f64) -> f64 {
    1e-9 * e.abs().max(1.0)
}

pub fn enumerate_minimisers(m: &QuboModel, keep: usize) -> Result<Minimisers, SolverError> {
    check_size(m)?;
    let mut best = f64::INFINITY;
    let mut assignments = Vec::new();
    let mut count = 0u64;
    gray_walk(m, |x, e| {
        if best.is_infinite() || e < best - energy_tolerance(best) {
            best = e;
            assignments.clear();
            count = 0;
        }
        if (e - best).abs() <= energy_tolerance(best) {
            count += 1;
            if assignments.len() < keep {
                assignments.push(x.to_vec());
            }
        }
    });
    let energy = assignments.first().map_or(best, |x| m.energy_unchecked(x));
    Ok(Minimisers {
        energy,
        assignments,
        count,
    })
}

pub fn solve_exhaustive_bits(m: &QuboModel) -> Result<SolveResult, SolverError> {
    let start = Instant::now();
    let mins = enumerate_minimisers(m, 1)?;
    let best_x = mins.assignments.into_iter().next().unwrap_or_default();
    let best_energy = m.energy_unchecked(&best_x);
    Ok(SolveResult {
        solver: "exhaustive".into(),
        n: m.n,
        best_x,
        best_energy,
        trace: vec![TracePoint {
            elapsed: start.elapsed().as_secs_f64(),
            flips: 1u64 << m.n,
            energy: best_energy,
        }],
        restarts_completed: 1,
        flips: 1u64 << m.n,
        seed: 0,
    })
}

/// Shared bookkeeping for the multistart heuristics.
struct Run {
    start: Instant,
    best_x: Bits,
    best_energy: f64,
    trace: Vec<TracePoint>,
    flips: u64,
}

impl Run {
    fn new(n: usize) -> Self {
        Self {
            start: Instant::now(),
            best_x: vec![0; n],
            best_energy: f64::INFINITY,
            trace: Vec::new(),
            flips: 0,
        }
    }

    fn offer(&mut self, x: &[u8], energy: f64) {
        if energy < self.best_energy {
            self.best_energy = energy;
            self.best_x.copy_from_slice(x);
            self.trace.push(TracePoint {
                elapsed: self.start.elapsed().as_secs_f64(),
                flips: self.flips,
                energy,
            });
        }
    }

    fn done(&self, floor: Option<f64>) -> bool {
        floor.is_some_and(|f| self.best_energy <= f)
    }

    fn finish(self, m: &QuboModel, solver: &str, restarts: usize, seed: u64) -> SolveResult {
        let best_energy = m.energy_unchecked(&self.best_x);
        let mut trace = self.trace;
        if let Some(last) = trace.last_mut() {
            last.energy = best_energy;
        }
        SolveResult {
            solver: solver.into(),
            n: m.n,
            best_x: self.best_x,
            best_energy,
            trace,
            restarts_completed: restarts,
            flips: self.flips,
            seed,
        }
    }
}

/// Per-restart stopping rule: a flip count or a deadline.
struct Budget {
    flips: Option<u64>,
    deadline: f64,
}

impl Budget {
    fn split(p: &SolverParams, r: usize, run: &Run) -> Self {
        let share = |total: u64| {
            let base = total / p.restarts as u64;
            base + u64::from((r as u64) < total % p.restarts as u64)
        };
        match p.max_flips {
            Some(total) => Budget {
                flips: Some(share(total)),
                deadline: f64::INFINITY,
            },
            None => Budget {
                flips: None,
                deadline: run.start.elapsed().as_secs_f64() + p.time_limit / p.restarts as f64,
            },
        }
    }

    #[inline]
    fn exhausted(&self, used: u64, run: &Run) -> bool {
        match self.flips {
            Some(b) => used >= b,
            None => used.is_multiple_of(256) && run.start.elapsed().as_secs_f64() >= self.deadline,
        }
    }
}

fn random_bits(n: usize, rng: &mut impl Rng) -> Bits {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

fn constant_result(m: &QuboModel, solver: &str, seed: u64) -> SolveResult {
    let x = vec![0; m.n];
    let e = m.energy_unchecked(&x);
    SolveResult {
        solver: solver.into(),
        n: m.n,
        best_x: x,
        best_energy: e,
        trace: vec![TracePoint {
            elapsed: 0.0,
            flips: 0,
            energy: e,
        }],
        restarts_completed: 0,
        flips: 0,
        seed,
    }
}

fn is_constant(m: &QuboModel) -> bool {
    m.linear.iter().all(|&a| a == 0.0) && m.quadratic.values().all(|&b| b == 0.0)
}

/// Multistart single-flip tabu search.
///
/// Each step flips the best bit that is not tabu, or a tabu bit whose flip
/// would beat the best energy seen so far; ties are broken at random. A
/// flipped bit stays tabu for `tabu_tenure` steps.
pub fn solve_tabu(m: &QuboModel, p: &SolverParams) -> Result<SolveResult, SolverError> {
    p.validate()?;
    if m.n == 0 || is_constant(m) {
        return Ok(constant_result(m, "tabu", p.seed));
    }
    let couplings = m.couplings();
    let tenure = p
        .tabu_tenure
        .unwrap_or((m.n / 10).max(10))
        .min(m.n.saturating_sub(1))
        .max(1) as u64;
    let floor = m.energy_floor();
    let mut run = Run::new(m.n);
    let mut completed = 0;
    for r in 0..p.restarts {
        if run.done(floor) {
            break;
        }
        let budget = Budget::split(p, r, &run);
        let mut rng = keyed_rng(p.seed, &[0x7ab0, r as u64]);
        let mut s = FlipState::new(m, &couplings, random_bits(m.n, &mut rng));
        run.offer(&s.x, s.energy);
        let mut tabu_until = vec![0u64; m.n];
        let mut used = 0u64;
        while !budget.exhausted(used, &run) && !run.done(floor) {
            let mut chosen = usize::MAX;
            let mut chosen_delta = f64::INFINITY;
            let mut ties = 0u32;
            for i in 0..m.n {
                let d = s.delta(i);
                let allowed = tabu_until[i] <= used || s.energy + d < run.best_energy;
                if !allowed {
                    continue;
                }
                if d < chosen_delta {
                    chosen = i;
                    chosen_delta = d;
                    ties = 1;
                } else if d == chosen_delta {
                    ties += 1;
                    if rng.random_range(0..ties) == 0 {
                        chosen = i;
                    }
                }
            }
            used += 1;
            run.flips += 1;
            if chosen == usize::MAX {
                continue;
            }
            s.flip(chosen);
            tabu_until[chosen] = used + tenure;
            run.offer(&s.x, s.energy);
        }
        completed += 1;
    }
    Ok(run.finish(m, "tabu", completed, p.seed))
}

/// Multistart Metropolis annealing with a geometric temperature schedule.
/// One sweep proposes a flip of every bit once, in a random order.
pub fn solve_anneal(m: &QuboModel, p: &SolverParams) -> Result<SolveResult, SolverError> {
    p.validate()?;
    if m.n == 0 || is_constant(m) {
        return Ok(constant_result(m, "anneal", p.seed));
    }
    let couplings = m.couplings();
    let floor = m.energy_floor();
    let sched = p.anneal;
    let ratio = sched.t_end / sched.t_start;
    let mut run = Run::new(m.n);
    let mut completed = 0;
    let mut order: Vec<usize> = (0..m.n).collect();
    for r in 0..p.restarts {
        if run.done(floor) {
            break;
        }
        let budget = Budget::split(p, r, &run);
        let mut rng = keyed_rng(p.seed, &[0xa22e, r as u64]);
        let mut s = FlipState::new(m, &couplings, random_bits(m.n, &mut rng));
        run.offer(&s.x, s.energy);
        let mut used = 0u64;
        'sweeps: for sweep in 0..sched.sweeps {
            let frac = if sched.sweeps > 1 {
                sweep as f64 / (sched.sweeps - 1) as f64
            } else {
                1.0
            };
            let temp = sched.t_start * ratio.powf(frac);
            order.shuffle(&mut rng);
            for &i in &order {
                if budget.exhausted(used, &run) || run.done(floor) {
                    break 'sweeps;
                }
                used += 1;
                run.flips += 1;
                let d = s.delta(i);
                if d <= 0.0 || rng.random::<f64>() < (-d / temp).exp() {
                    s.flip(i);
                    if d < 0.0 {
                        run.offer(&s.x, s.energy);
                    }
                }
            }
        }
        completed += 1;
    }
    Ok(run.finish(m, "anneal", completed, p.seed))
}

/// Optimal walks found by [`solve_exhaustive_walks`]: one walk, or two for
/// the diploid problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSolution {
    pub walks: Vec<Walk>,
    pub cost: f64,
    pub expansions: u64,
}

struct WalkSearch<'a> {
    g: &'a AnnotatedGraph,
    kind: ProblemKind,
    horizon: usize,
    weights: Vec<f64>,
    counts: Vec<f64>,
    limit: u64,
    expansions: u64,
    current: Vec<Vec<Visit>>,
    best_cost: f64,
    best: Vec<Vec<Visit>>,
}

impl WalkSearch<'_> {
    fn term(&self, v: usize) -> f64 {
        let d = self.counts[v] - self.weights[v];
        d * d
    }

    /// Lower bound on the final cost given `remaining` further visits: the
    /// squared excess of overfull nodes is fixed, and the deficit that the
    /// remaining visits cannot cover is spread evenly at best.
    fn bound(&self, remaining: usize) -> f64 {
        let mut excess = 0.0;
        let mut deficit = 0.0;
        let mut short = 0usize;
        for v in 0..self.weights.len() {
            let d = self.counts[v] - self.weights[v];
            if d > 0.0 {
                excess += d * d;
            } else if d < 0.0 {
                deficit -= d;
                short += 1;
            }
        }
        let uncovered = (deficit - remaining as f64).max(0.0);
        if short == 0 {
            excess
        } else {
            excess + uncovered * uncovered / short as f64
        }
    }

    fn successors(&self, v: Visit) -> Vec<Visit> {
        match self.kind {
            ProblemKind::Tangle => {
                let mut next: Vec<Visit> = self
                    .g
                    .successors(Visit::fwd(v.node))
                    .iter()
                    .filter(|s| s.orient == crate::gfa::Orientation::Forward)
                    .copied()
                    .collect();
                next.dedup();
                next
            }
            _ => self.g.successors(v).to_vec(),
        }
    }

    fn starts(&self) -> Vec<Visit> {
        let n = self.weights.len();
        match self.kind {
            ProblemKind::Tangle => (0..n).map(Visit::fwd).collect(),
            _ => (0..2 * n).map(Visit::from_slot).collect(),
        }
    }

    fn remaining(&self, path: usize) -> usize {
        let paths = self.current.len();
        (self.horizon - self.current[path].len()) + (paths - 1 - path) * self.horizon
    }

    fn cost(&self) -> f64 {
        (0..self.weights.len()).map(|v| self.term(v)).sum()
    }

    /// Explores every extension of the walk on `path`, then closes it and
    /// moves on to the next path.
    fn search(&mut self, path: usize, cost: f64) -> Result<(), SolverError> {
        self.expansions += 1;
        if self.expansions > self.limit {
            return Err(SolverError::SearchTooLarge(self.limit));
        }
        if self.bound(self.remaining(path)) >= self.best_cost {
            return Ok(());
        }
        // Close this walk here.
        if path + 1 < self.current.len() {
            self.search(path + 1, cost)?;
        } else if cost < self.best_cost {
            self.best_cost = cost;
            self.best = self.current.clone();
        }
        if self.current[path].len() == self.horizon {
            return Ok(());
        }
        let next = match self.current[path].last() {
            Some(&v) => self.successors(v),
            None => self.starts(),
        };
        for v in next {
            let delta = 2.0 * (self.counts[v.node] - self.weights[v.node]) + 1.0;
            self.counts[v.node] += 1.0;
            self.current[path].push(v);
            self.search(path, cost + delta)?;
            self.current[path].pop();
            self.counts[v.node] -= 1.0;
        }
        Ok(())
    }
}

/// Branch-and-bound search over all walks (or walk pairs) of length at most
/// `horizon`, minimising the objective of `kind` with the graph's weights.
///
/// Ties keep the first optimum in search order: shorter prefixes before
/// extensions, successors in ascending order.
pub fn solve_exhaustive_walks(
    g: &AnnotatedGraph,
    kind: ProblemKind,
    horizon: usize,
) -> Result<WalkSolution, SolverError> {
    solve_exhaustive_walks_limited(g, kind, horizon, DEFAULT_WALK_EXPANSIONS)
}

pub fn solve_exhaustive_walks_limited(
    g: &AnnotatedGraph,
    kind: ProblemKind,
    horizon: usize,
    limit: u64,
) -> Result<WalkSolution, SolverError> {
    let weights = g.weights();
    let n = weights.len();
    let paths = kind.paths();
    let mut s = WalkSearch {
        g,
        kind,
        horizon,
        weights,
        counts: vec![0.0; n],
        limit,
        expansions: 0,
        current: vec![Vec::new(); paths],
        best_cost: f64::INFINITY,
        best: vec![Vec::new(); paths],
    };
    let empty = s.cost();
    s.search(0, empty)?;
    Ok(WalkSolution {
        walks: s.best.into_iter().map(Walk::new).collect(),
        cost: s.best_cost,
        expansions: s.expansions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{build_tangle_qubo, encode_walk};
    use crate::tangle::cost;

    fn three_node() -> AnnotatedGraph {
        let mut g = AnnotatedGraph::new(3);
        for id in ["a", "b", "c"] {
            g.add_node(id, "ACGT").unwrap();
        }
        g.set_weights(&[1.0, 2.0, 1.0]);
        g.add_edge(Visit::fwd(0), Visit::fwd(1), 1);
        g.add_edge(Visit::fwd(1), Visit::fwd(2), 1);
        g.add_edge(Visit::fwd(2), Visit::fwd(1), 1);
        g
    }

    #[test]
    fn walk_oracle_examples() {
        let mut g = AnnotatedGraph::new(3);
        g.add_node("v", "ACGT").unwrap();
        g.set_weights(&[2.0]);
        g.add_edge(Visit::fwd(0), Visit::fwd(0), 1);
        let s = solve_exhaustive_walks(&g, ProblemKind::Tangle, 3).unwrap();
        assert_eq!(s.cost, 0.0);
        assert_eq!(s.walks[0], Walk::new(vec![Visit::fwd(0); 2]));

        let s = solve_exhaustive_walks(&three_node(), ProblemKind::Tangle, 5).unwrap();
        assert_eq!(s.cost, 0.0);
        let ids: Vec<usize> = s.walks[0].visits.iter().map(|v| v.node).collect();
        assert_eq!(ids, vec![0, 1, 2, 1]);

        // Two isolated nodes of weight 2 and no loops: a walk is at most one
        // visit, so the optimum is (1-2)^2 + (0-2)^2 = 5.
        let mut g = AnnotatedGraph::new(3);
        g.add_node("a", "ACGT").unwrap();
        g.add_node("b", "ACGT").unwrap();
        g.set_weights(&[2.0, 2.0]);
        let s = solve_exhaustive_walks(&g, ProblemKind::Tangle, 5).unwrap();
        assert_eq!(s.cost, 5.0);
        assert_eq!(s.walks[0].len(), 1);
    }

    #[test]
    fn walk_oracle_matches_plain_enumeration() {
        let g = three_node();
        let mut best = f64::INFINITY;
        for len in 0..=4u32 {
            for code in 0..3usize.pow(len) {
                let w = Walk::new((0..len).map(|i| Visit::fwd(code / 3usize.pow(i) % 3)).collect());
                if let Ok(c) = cost(&g, ProblemKind::Tangle, &[w]) {
                    best = best.min(c);
                }
            }
        }
        for kind in [ProblemKind::Tangle, ProblemKind::Oriented] {
            assert_eq!(solve_exhaustive_walks(&g, kind, 4).unwrap().cost, best);
        }
        let d = solve_exhaustive_walks(&g, ProblemKind::Diploid, 4).unwrap();
        assert_eq!(d.walks.len(), 2);
        assert_eq!(cost(&g, ProblemKind::Diploid, &d.walks).unwrap(), d.cost);
    }

    #[test]
    fn walk_oracle_budget() {
        let mut g = three_node();
        g.set_weights(&[7.0, 7.0, 7.0]);
        assert_eq!(
            solve_exhaustive_walks_limited(&g, ProblemKind::Oriented, 20, 50),
            Err(SolverError::SearchTooLarge(50))
        );
    }

    #[test]
    fn exhaustive_bits_examples() {
        let mut g = AnnotatedGraph::new(3);
        g.add_node("v", "ACGT").unwrap();
        g.set_weights(&[1.0]);
        let m = build_tangle_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        let r = solve_exhaustive_bits(&m).unwrap();
        assert_eq!(r.best_energy, 0.0);
        let mins = enumerate_minimisers(&m, 10).unwrap();
        assert_eq!(mins.count, 1);

        let mut z = QuboModel::new(5);
        z.offset = 2.5;
        let r = solve_exhaustive_bits(&z).unwrap();
        assert_eq!(r.best_energy, 2.5);
        assert_eq!(r.best_x, vec![0; 5]);
        assert_eq!(enumerate_minimisers(&z, 0).unwrap().count, 32);
        assert!(matches!(
            solve_exhaustive_bits(&QuboModel::new(27)),
            Err(SolverError::TooManyVariables { .. })
        ));
    }

    #[test]
    fn heuristics_find_small_optimum_and_are_deterministic() {
        let g = three_node();
        let m = build_tangle_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        let p = SolverParams::with_flips(20_000, 3);
        for solve in [solve_tabu, solve_anneal] {
            let r = solve(&m, &p).unwrap();
            assert_eq!(r.best_energy, 0.0);
            assert_eq!(m.energy(&r.best_x).unwrap(), r.best_energy);
            assert!(r.trace.windows(2).all(|w| w[1].energy <= w[0].energy));
            let again = solve(&m, &p).unwrap();
            assert_eq!(r.best_x, again.best_x);
            assert_eq!(r.trace.len(), again.trace.len());
        }
        let l = m.layout.as_ref().unwrap();
        let w = Walk::new([0, 1, 2, 1].map(Visit::fwd).to_vec());
        assert_eq!(m.energy(&encode_walk(l, &[w]).unwrap()), Ok(0.0));
    }

    #[test]
    fn zero_model_returns_offset() {
        let mut z = QuboModel::new(4);
        z.offset = 7.0;
        let r = solve_tabu(&z, &SolverParams::with_flips(1000, 1)).unwrap();
        assert_eq!(r.best_energy, 7.0);
        assert_eq!(r.flips, 0);
    }

    #[test]
    fn cold_anneal_never_climbs() {
        let g = three_node();
        let m = build_tangle_qubo(&g, 1.2, 10.0, 5.0).unwrap();
        let mut p = SolverParams::with_flips(5_000, 9);
        p.restarts = 1;
        p.anneal = AnnealSchedule {
            t_start: 2e-12,
            t_end: 1e-12,
            sweeps: 100,
        };
        let r = solve_anneal(&m, &p).unwrap();
        // With a single restart the trace is the accepted descent itself.
        assert!(r.trace.windows(2).all(|w| w[1].energy < w[0].energy));
    }

    #[test]
    fn param_validation() {
        let mut p = SolverParams::default();
        p.anneal.t_end = p.anneal.t_start;
        assert!(p.validate().is_err());
        let p = SolverParams {
            restarts: 0,
            ..SolverParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn result_json_round_trip() {
        let r = SolveResult {
            solver: "tabu".into(),
            n: 11,
            best_x: vec![1, 0, 1, 1, 0, 0, 0, 0, 0, 1, 1],
            best_energy: 3.0,
            trace: vec![TracePoint {
                elapsed: 0.5,
                flips: 10,
                energy: 3.0,
            }],
            restarts_completed: 2,
            flips: 10,
            seed: 4,
        };
        let json = r.to_json();
        assert!(json.contains("\"0d06\""));
        assert_eq!(SolveResult::from_json(&json).unwrap(), r);
    }
}
