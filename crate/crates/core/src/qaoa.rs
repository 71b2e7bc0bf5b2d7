//! Statevector simulation of QAOA on QUBO models.
//!
//! Basis state `k` has `x_i` equal to bit `i` of `k`; `x_i = 1` is the
//! `|1>` state with `Z` eigenvalue `-1`, so `x_i = (1 - z_i) / 2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qubo::{Bits, QuboModel};
use crate::synth::keyed_rng;

pub const DEFAULT_MAX_QUBITS: usize = 20;
pub const DEFAULT_CVAR_ALPHA: f64 = 0.1;
pub const DEFAULT_LAYERS: usize = 2;

/// States at least this large have their amplitude updates spread over
/// threads.
const PARALLEL_MIN_STATES: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QaoaError {
    #[error("{n} qubits exceeds the cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },
    #[error("gamma and beta lengths differ ({gammas} vs {betas})")]
    LayerMismatch { gammas: usize, betas: usize },
    #[error("invalid QAOA setting: {0}")]
    BadConfig(String),
}

/// `constant + sum_i h_i z_i + sum_{i<j} J_ij z_i z_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingHamiltonian {
    pub n: usize,
    pub constant: f64,
    pub h: Vec<f64>,
    pub j: BTreeMap<(usize, usize), f64>,
}

impl IsingHamiltonian {
    /// Energy of basis state `k`.
    pub fn basis_energy(&self, k: u64) -> f64 {
        let z = |i: usize| if (k >> i) & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = self.constant;
        for (i, &h) in self.h.iter().enumerate() {
            e += h * z(i);
        }
        for (&(a, b), &c) in &self.j {
            e += c * z(a) * z(b);
        }
        e
    }
}

pub fn qubo_to_ising(m: &QuboModel) -> IsingHamiltonian {
    let mut constant = m.offset;
    let mut h = vec![0.0; m.n];
    let mut j = BTreeMap::new();
    for (i, &a) in m.linear.iter().enumerate() {
        constant += a / 2.0;
        h[i] -= a / 2.0;
    }
    for (&(a, b), &c) in &m.quadratic {
        constant += c / 4.0;
        h[a] -= c / 4.0;
        h[b] -= c / 4.0;
        *j.entry((a, b)).or_insert(0.0) += c / 4.0;
    }
    IsingHamiltonian { n: m.n, constant, h, j }
}

/// Basis-state index of an assignment.
pub fn bits_to_index(x: &[u8]) -> u64 {
    x.iter().enumerate().fold(0, |k, (i, &b)| k | (u64::from(b & 1) << i))
}

pub fn index_to_bits(k: u64, n: usize) -> Bits {
    (0..n).map(|i| ((k >> i) & 1) as u8).collect()
}

/// QUBO energy of assignments packed into integers, evaluated one byte at a
/// time: a table per byte for the terms inside it and a table per pair of
/// bytes for the couplings between them.
#[derive(Debug, Clone)]
pub struct PackedEnergy {
    offset: f64,
    bytes: usize,
    single: Vec<[f64; 256]>,
    pairs: Vec<(usize, usize, Vec<f64>)>,
}

impl PackedEnergy {
    pub const MAX_BITS: usize = 32;

    pub fn new(m: &QuboModel) -> Self {
        assert!(m.n <= Self::MAX_BITS, "packed energy supports at most 32 variables");
        let bytes = m.n.div_ceil(8).max(1);
        let mut single = vec![[0.0; 256]; bytes];
        let mut pairs = Vec::new();
        let bit = |v: usize, i: usize| (v >> (i % 8)) & 1 == 1;
        for (b, table) in single.iter_mut().enumerate() {
            for (v, e) in table.iter_mut().enumerate() {
                for i in (8 * b..(8 * b + 8).min(m.n)).filter(|&i| bit(v, i)) {
                    *e += m.linear[i];
                }
            }
        }
        for (&(i, j), &c) in &m.quadratic {
            if i / 8 == j / 8 {
                for (v, e) in single[i / 8].iter_mut().enumerate() {
                    if bit(v, i) && bit(v, j) {
                        *e += c;
                    }
                }
            }
        }
        for bi in 0..bytes {
            for bj in bi + 1..bytes {
                let terms: Vec<(usize, usize, f64)> = m
                    .quadratic
                    .iter()
                    .filter(|(&(i, j), _)| i / 8 == bi && j / 8 == bj)
                    .map(|(&(i, j), &c)| (i, j, c))
                    .collect();
                if terms.is_empty() {
                    continue;
                }
                let mut table = vec![0.0; 1 << 16];
                for (v, e) in table.iter_mut().enumerate() {
                    let (lo, hi) = (v & 0xff, v >> 8);
                    for &(i, j, c) in &terms {
                        if bit(lo, i) && bit(hi, j) {
                            *e += c;
                        }
                    }
                }
                pairs.push((bi, bj, table));
            }
        }
        Self {
            offset: m.offset,
            bytes,
            single,
            pairs,
        }
    }

    #[inline]
    pub fn energy(&self, k: u64) -> f64 {
        let byte = |b: usize| ((k >> (8 * b)) & 0xff) as usize;
        let mut e = self.offset;
        for b in 0..self.bytes {
            e += self.single[b][byte(b)];
        }
        for (bi, bj, table) in &self.pairs {
            e += table[byte(*bi) | (byte(*bj) << 8)];
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self, QaoaError> {
        if gammas.len() != betas.len() {
            return Err(QaoaError::LayerMismatch {
                gammas: gammas.len(),
                betas: betas.len(),
            });
        }
        Ok(Self { gammas, betas })
    }

    pub fn layers(&self) -> usize {
        self.gammas.len()
    }
}

/// Energies of every basis state.
pub fn diagonal(h: &IsingHamiltonian) -> Vec<f64> {
    (0..1u64 << h.n).map(|k| h.basis_energy(k)).collect()
}

fn apply_phase(state: &mut [Complex64], energies: &[f64], gamma: f64) {
    let f = |(a, &e): (&mut Complex64, &f64)| *a *= Complex64::from_polar(1.0, -gamma * e);
    if state.len() >= PARALLEL_MIN_STATES {
        state.par_iter_mut().zip(energies.par_iter()).for_each(f);
    } else {
        state.iter_mut().zip(energies.iter()).for_each(f);
    }
}

/// `exp(-i beta X)` on every qubit.
fn apply_mixer(state: &mut [Complex64], n: usize, beta: f64) {
    let (c, s) = (beta.cos(), beta.sin());
    let rotate = |block: &mut [Complex64], stride: usize| {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x0, x1) = (*a0, *a1);
            *a0 = Complex64::new(c * x0.re + s * x1.im, c * x0.im - s * x1.re);
            *a1 = Complex64::new(s * x0.im + c * x1.re, -s * x0.re + c * x1.im);
        }
    };
    for q in 0..n {
        let stride = 1usize << q;
        if state.len() >= PARALLEL_MIN_STATES {
            state.par_chunks_mut(2 * stride).for_each(|b| rotate(b, stride));
        } else {
            state.chunks_mut(2 * stride).for_each(|b| rotate(b, stride));
        }
    }
}

/// Squared norm of a state.
pub fn norm_sqr(state: &[Complex64]) -> f64 {
    state.iter().map(|a| a.norm_sqr()).sum()
}

fn check_cap(n: usize, cap: usize) -> Result<(), QaoaError> {
    if n > cap {
        return Err(QaoaError::TooManyQubits { n, cap });
    }
    Ok(())
}

/// The uniform superposition followed by `p` cost/mixer layer pairs, with
/// the diagonal of the cost operator given.
pub fn run_circuit_on_diagonal(n: usize, energies: &[f64], theta: &QaoaParams) -> Vec<Complex64> {
    let amp = Complex64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
    let mut state = vec![amp; 1 << n];
    for (&g, &b) in theta.gammas.iter().zip(&theta.betas) {
        apply_phase(&mut state, energies, g);
        apply_mixer(&mut state, n, b);
    }
    state
}

pub fn run_qaoa_circuit(
    h: &IsingHamiltonian,
    theta: &QaoaParams,
    max_qubits: usize,
) -> Result<Vec<Complex64>, QaoaError> {
    check_cap(h.n, max_qubits)?;
    Ok(run_circuit_on_diagonal(h.n, &diagonal(h), theta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub n: usize,
    pub shots: u64,
    /// Distinct basis states drawn, ascending.
    pub states: Vec<u64>,
    pub counts: Vec<u64>,
    pub energies: Vec<f64>,
    pub seed: u64,
}

impl SampleBatch {
    fn from_draws(n: usize, draws: impl Iterator<Item = u64>, energy: impl Fn(u64) -> f64, seed: u64) -> Self {
        let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
        for k in draws {
            *hist.entry(k).or_insert(0) += 1;
        }
        let shots = hist.values().sum();
        let states: Vec<u64> = hist.keys().copied().collect();
        let energies = states.iter().map(|&k| energy(k)).collect();
        Self {
            n,
            shots,
            counts: hist.into_values().collect(),
            states,
            energies,
            seed,
        }
    }

    pub fn bits(&self, i: usize) -> Bits {
        index_to_bits(self.states[i], self.n)
    }

    /// Lowest-energy state, lowest index first on ties.
    pub fn best(&self) -> Option<(u64, f64)> {
        self.states
            .iter()
            .zip(&self.energies)
            .fold(None, |acc: Option<(u64, f64)>, (&k, &e)| match acc {
                Some((_, be)) if be <= e => acc,
                _ => Some((k, e)),
            })
    }

    /// Energies with multiplicity, ascending.
    pub fn sorted_energies(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .energies
            .iter()
            .zip(&self.counts)
            .flat_map(|(&e, &c)| std::iter::repeat_n(e, c as usize))
            .collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// `state,bits,count,energy` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("state,bits,count,energy\n");
        for i in 0..self.states.len() {
            let bits: String = self.bits(i).iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
            s.push_str(&format!(
                "{},{},{},{}\n",
                self.states[i], bits, self.counts[i], self.energies[i]
            ));
        }
        s
    }
}

/// `shots` independent draws from `|amplitude|^2`, with energies from `energy`.
pub fn sample_state_with(
    state: &[Complex64],
    n: usize,
    shots: u64,
    seed: u64,
    energy: impl Fn(u64) -> f64,
) -> SampleBatch {
    let probs: Vec<f64> = state.iter().map(|a| a.norm_sqr()).collect();
    let dist = WeightedIndex::new(&probs).expect("state has positive norm");
    let mut rng = keyed_rng(seed, &[0x5a3b]);
    let draws: Vec<u64> = (0..shots).map(|_| dist.sample(&mut rng) as u64).collect();
    SampleBatch::from_draws(n, draws.into_iter(), energy, seed)
}

/// Samples a state and scores the draws with the model's packed-bit energy.
pub fn sample_state(state: &[Complex64], m: &QuboModel, shots: u64, seed: u64) -> SampleBatch {
    let packed = PackedEnergy::new(m);
    sample_state_with(state, m.n, shots, seed, |k| packed.energy(k))
}

/// Uniformly random assignments, the baseline QAOA is compared with.
pub fn sample_uniform(m: &QuboModel, shots: u64, seed: u64) -> SampleBatch {
    let packed = PackedEnergy::new(m);
    let mut rng = keyed_rng(seed, &[0x0a1f]);
    let draws: Vec<u64> = (0..shots).map(|_| rng.random::<u64>() & mask(m.n)).collect();
    SampleBatch::from_draws(m.n, draws.into_iter(), |k| packed.energy(k), seed)
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Mean of the lowest `ceil(alpha * shots)` sampled energies.
pub fn cvar(batch: &SampleBatch, alpha: f64) -> f64 {
    assert!(batch.shots > 0, "empty batch");
    assert!(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
    let take = ((alpha * batch.shots as f64 - 1e-9).ceil() as usize).max(1);
    let all = batch.sorted_energies();
    all[..take].iter().sum::<f64>() / take as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaoaConfig {
    pub layers: usize,
    pub shots: u64,
    pub max_iters: usize,
    pub alpha_cvar: f64,
    pub seed: u64,
    pub max_qubits: usize,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        Self {
            layers: DEFAULT_LAYERS,
            shots: 1000,
            max_iters: 100,
            alpha_cvar: DEFAULT_CVAR_ALPHA,
            seed: 0,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl QaoaConfig {
    pub fn validate(&self) -> Result<(), QaoaError> {
        let bad = |m: &str| Err(QaoaError::BadConfig(m.into()));
        if !(1..=20).contains(&self.layers) {
            return bad("layers must lie in 1..=20");
        }
        if self.shots == 0 {
            return bad("shots must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.alpha_cvar > 0.0 && self.alpha_cvar <= 1.0) {
            return bad("alpha_cvar must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    /// CVaR of this iteration's batch.
    pub cvar: f64,
    /// CVaR of the accepted parameters after this iteration.
    pub incumbent_cvar: f64,
    pub best_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaOutcome {
    pub params: QaoaParams,
    /// Fresh batch drawn at the final parameters.
    pub final_batch: SampleBatch,
    /// Batch of the first iteration.
    pub first_batch: SampleBatch,
    pub best_x: Bits,
    pub best_energy: f64,
    pub trace: Vec<IterationRecord>,
}

/// Starting angles: a ramp of cost angles scaled to the spread of the
/// energies and a matching descending ramp of mixer angles.
fn initial_params(layers: usize, energies: &[f64]) -> QaoaParams {
    let mean = energies.iter().sum::<f64>() / energies.len() as f64;
    let var = energies.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / energies.len() as f64;
    let sd = var.sqrt().max(1e-12);
    let gammas = (0..layers)
        .map(|l| (0.5 / sd) * (l + 1) as f64 / layers as f64)
        .collect();
    let betas = (0..layers)
        .map(|l| (PI / 8.0) * (layers - l) as f64 / layers as f64)
        .collect();
    QaoaParams { gammas, betas }
}

fn wrap(v: f64, period: f64) -> f64 {
    v.rem_euclid(period)
}

/// Coordinate pattern search over the angles, minimising CVaR of fresh
/// batches. Every evaluation is one iteration; a coordinate move is kept
/// only when it lowers the incumbent CVaR, and the step sizes halve after a
/// full pass without improvement.
pub fn optimize_qaoa(m: &QuboModel, cfg: &QaoaConfig) -> Result<QaoaOutcome, QaoaError> {
    cfg.validate()?;
    check_cap(m.n, cfg.max_qubits)?;
    let h = qubo_to_ising(m);
    let energies = diagonal(&h);
    let packed = PackedEnergy::new(m);
    let energy = |k: u64| packed.energy(k);

    let mut theta = initial_params(cfg.layers, &energies);
    let p = cfg.layers;
    let mut steps: Vec<f64> = theta
        .gammas
        .iter()
        .map(|g| g * 0.5)
        .chain(std::iter::repeat_n(PI / 16.0, p))
        .collect();
    let period = |c: usize| if c < p { 2.0 * PI } else { PI };

    let mut iteration = 0usize;
    let mut best_x = vec![0u8; m.n];
    let mut best_energy = f64::INFINITY;
    let mut trace = Vec::new();
    let mut eval = |theta: &QaoaParams, iteration: usize| {
        let state = run_circuit_on_diagonal(m.n, &energies, theta);
        let batch = sample_state_with(&state, m.n, cfg.shots, cfg.seed ^ ((iteration as u64) << 32), energy);
        if let Some((k, e)) = batch.best() {
            if e < best_energy {
                best_energy = e;
                best_x = index_to_bits(k, m.n);
            }
        }
        let c = cvar(&batch, cfg.alpha_cvar);
        (batch, c, best_energy)
    };

    let (first_batch, mut incumbent, be) = eval(&theta, iteration);
    trace.push(IterationRecord {
        iteration,
        gammas: theta.gammas.clone(),
        betas: theta.betas.clone(),
        cvar: incumbent,
        incumbent_cvar: incumbent,
        best_energy: be,
    });
    iteration += 1;

    'search: while iteration < cfg.max_iters {
        let mut improved = false;
        for c in 0..2 * p {
            for dir in [1.0, -1.0] {
                if iteration >= cfg.max_iters {
                    break 'search;
                }
                let mut cand = theta.clone();
                let slot = if c < p {
                    &mut cand.gammas[c]
                } else {
                    &mut cand.betas[c - p]
                };
                *slot = wrap(*slot + dir * steps[c], period(c));
                let (_, value, be) = eval(&cand, iteration);
                if value < incumbent {
                    theta = cand;
                    incumbent = value;
                    improved = true;
                }
                trace.push(IterationRecord {
                    iteration,
                    gammas: theta.gammas.clone(),
                    betas: theta.betas.clone(),
                    cvar: value,
                    incumbent_cvar: incumbent,
                    best_energy: be,
                });
                iteration += 1;
                if improved {
                    break;
                }
            }
        }
        if !improved {
            for s in &mut steps {
                *s *= 0.5;
            }
        }
    }

    let state = run_circuit_on_diagonal(m.n, &energies, &theta);
    let final_batch = sample_state_with(&state, m.n, cfg.shots, cfg.seed ^ 0xf1a1_0000_0000_0000, energy);
    if let Some((k, e)) = final_batch.best() {
        if e < best_energy {
            best_x = index_to_bits(k, m.n);
        }
    }
    Ok(QaoaOutcome {
        params: theta,
        final_batch,
        first_batch,
        best_energy: m.energy_unchecked(&best_x),
        best_x,
        trace,
    })
}
