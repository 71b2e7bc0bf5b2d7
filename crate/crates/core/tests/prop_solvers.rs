mod common;

use common::rng;
use num_complex::Complex64;
use proptest::prelude::*;
use qtangle::qaoa::{
    diagonal, index_to_bits, norm_sqr, qubo_to_ising, run_circuit_on_diagonal, PackedEnergy, QaoaParams,
};
use qtangle::qubo::QuboModel;
use qtangle::solvers::{
    enumerate_minimisers, flip_delta, solve_anneal, solve_exhaustive_bits, solve_tabu, SolverParams,
};
use rand::Rng;

/// Integer-coefficient model over `n` variables.
fn random_model(r: &mut impl Rng, n: usize, density: f64) -> QuboModel {
    let mut m = QuboModel::new(n);
    m.offset = r.random_range(-20..=20) as f64;
    for i in 0..n {
        m.add_linear(i, r.random_range(-10..=10) as f64);
        for j in i + 1..n {
            if r.random_bool(density) {
                m.add_quadratic(i, j, r.random_range(-10..=10) as f64);
            }
        }
    }
    m
}

fn random_bits(r: &mut impl Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| r.random_range(0..2)).collect()
}

fn brute_min(m: &QuboModel) -> (f64, u64) {
    let mut best = f64::INFINITY;
    let mut count = 0;
    for k in 0u64..1 << m.n {
        let e = m.energy(&index_to_bits(k, m.n)).unwrap();
        if e < best {
            best = e;
            count = 0;
        }
        if e == best {
            count += 1;
        }
    }
    (best, count)
}

/// `exp(-i beta sum_q X_q)` as a dense matrix, via the Hadamard basis in
/// which the summed X operator is diagonal.
fn dense_mixer(n: usize, beta: f64) -> Vec<Vec<Complex64>> {
    let dim = 1usize << n;
    let scale = 1.0 / dim as f64;
    (0..dim)
        .map(|a| {
            (0..dim)
                .map(|b| {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for k in 0..dim {
                        let sign = if ((a & k).count_ones() + (b & k).count_ones()) % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        };
                        let eig = n as f64 - 2.0 * k.count_ones() as f64;
                        sum += Complex64::from_polar(sign, -beta * eig);
                    }
                    sum * scale
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(common::cases(1000))]

    #[test]
    fn flip_delta_matches_full_reevaluation(seed in any::<u64>(), n in 1usize..40) {
        let mut r = rng(seed);
        let m = random_model(&mut r, n, 0.3);
        let c = m.couplings();
        for _ in 0..10 {
            let mut x = random_bits(&mut r, n);
            let i = r.random_range(0..n);
            let before = m.energy(&x).unwrap();
            let delta = flip_delta(&m, &c, &x, i);
            x[i] ^= 1;
            prop_assert_eq!(m.energy(&x).unwrap() - before, delta);
        }
    }

    #[test]
    fn solvers_report_the_energy_of_their_assignment(seed in any::<u64>(), n in 1usize..14) {
        let mut r = rng(seed);
        let m = random_model(&mut r, n, 0.4);
        let p = SolverParams { restarts: 2, ..SolverParams::with_flips(2_000, seed) };
        let (best, _) = brute_min(&m);
        let exact = solve_exhaustive_bits(&m).unwrap();
        prop_assert_eq!(exact.best_energy, best);
        for res in [exact, solve_tabu(&m, &p).unwrap(), solve_anneal(&m, &p).unwrap()] {
            prop_assert_eq!(res.best_x.len(), n);
            prop_assert_eq!(m.energy(&res.best_x).unwrap(), res.best_energy);
            prop_assert!(res.best_energy >= best);
        }
    }

    #[test]
    fn budgeted_solvers_are_deterministic(seed in any::<u64>(), n in 1usize..30) {
        let mut r = rng(seed);
        let m = random_model(&mut r, n, 0.3);
        let p = SolverParams { restarts: 3, ..SolverParams::with_flips(1_500, seed) };
        let strip = |mut s: qtangle::solvers::SolveResult| {
            for t in &mut s.trace {
                t.elapsed = 0.0;
            }
            s
        };
        prop_assert_eq!(strip(solve_tabu(&m, &p).unwrap()), strip(solve_tabu(&m, &p).unwrap()));
        prop_assert_eq!(strip(solve_anneal(&m, &p).unwrap()), strip(solve_anneal(&m, &p).unwrap()));
    }

    #[test]
    fn enumerated_minimisers_match_brute_force(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let m = random_model(&mut r, n, 0.3);
        let (best, count) = brute_min(&m);
        let found = enumerate_minimisers(&m, 4).unwrap();
        prop_assert_eq!(found.energy, best);
        prop_assert_eq!(found.count, count);
        for x in &found.assignments {
            prop_assert_eq!(m.energy(x).unwrap(), best);
        }
    }

    #[test]
    fn ising_and_packed_energies_equal_qubo_energy(seed in any::<u64>(), n in 1usize..=10) {
        let mut r = rng(seed);
        let m = random_model(&mut r, n, 0.5);
        let h = qubo_to_ising(&m);
        let packed = PackedEnergy::new(&m);
        for k in 0u64..1 << n {
            let e = m.energy(&index_to_bits(k, n)).unwrap();
            prop_assert_eq!(h.basis_energy(k), e);
            prop_assert_eq!(packed.energy(k), e);
        }
    }

    #[test]
    fn circuit_preserves_the_norm_after_every_layer(
        seed in any::<u64>(),
        n in 1usize..=8,
        angles in prop::collection::vec((-3.2f64..3.2, -3.2f64..3.2), 1..6),
    ) {
        let mut r = rng(seed);
        let m = random_model(&mut r, n, 0.4);
        let energies = diagonal(&qubo_to_ising(&m));
        for layers in 1..=angles.len() {
            let (g, b): (Vec<f64>, Vec<f64>) = angles[..layers].iter().copied().unzip();
            let state = run_circuit_on_diagonal(n, &energies, &QaoaParams::new(g, b).unwrap());
            let norm = norm_sqr(&state);
            prop_assert!((norm - 1.0).abs() <= 1e-10, "layer {}: {}", layers, norm);
        }
    }

    #[test]
    fn mixer_equals_the_dense_exponential(
        seed in any::<u64>(),
        n in 1usize..=6,
        gamma in -3.2f64..3.2,
        beta in -3.2f64..3.2,
    ) {
        let mut r = rng(seed);
        let energies: Vec<f64> = (0..1 << n).map(|_| r.random_range(-10.0..10.0)).collect();
        let state = run_circuit_on_diagonal(n, &energies, &QaoaParams::new(vec![gamma], vec![beta]).unwrap());
        let dim = 1usize << n;
        let amp = (1.0 / dim as f64).sqrt();
        let phased: Vec<Complex64> = energies.iter().map(|&e| Complex64::from_polar(amp, -gamma * e)).collect();
        let u = dense_mixer(n, beta);
        for (a, row) in u.iter().enumerate() {
            let expect: Complex64 = row.iter().zip(&phased).map(|(m, s)| m * s).sum();
            prop_assert!((state[a] - expect).norm() <= 1e-10, "{} vs {}", state[a], expect);
        }
    }
}
