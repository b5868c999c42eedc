//! Independent Monte Carlo oracle for the line-topology expectations.
//!
//! The simulator here is written from the process definition alone (n
//! locations on a line, rate-λ marked Poisson requests per location, accept
//! iff the whole bundle fits and is free) and never touches the production
//! simulator or the coefficient tables it checks.

use dsp_core::{BundlePmf, ExpectationQuery, GammaTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One realization of the line process; returns the picked-up count.
fn simulate_line_once(n: usize, lambda: f64, pmf: &BundlePmf, horizon: f64, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut free = vec![true; n];
    let mut picked = 0usize;
    let rate = n as f64 * lambda;
    if rate <= 0.0 {
        return 0;
    }
    let mut t = 0.0;
    loop {
        // Superposition of the n location processes.
        t -= (1.0 - rng.random::<f64>()).ln() / rate;
        if t > horizon {
            return picked;
        }
        let loc = rng.random_range(0..n);
        let size = pmf.sample(&mut rng);
        if loc + size > n {
            continue; // bundle would run off the end of the line
        }
        if free[loc..loc + size].iter().all(|&f| f) {
            for slot in free[loc..loc + size].iter_mut() {
                *slot = false;
            }
            picked += size;
        }
    }
}

fn line_mc(n: usize, lambda: f64, pmf: &BundlePmf, horizon: f64, reps: usize, seed: u64) -> (f64, f64) {
    let counts: Vec<f64> = (0..reps as u64)
        .map(|r| {
            simulate_line_once(n, lambda, pmf, horizon, seed.wrapping_add(r).wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1)) as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (reps as f64 - 1.0);
    (mean, (var / reps as f64).sqrt())
}

#[test]
fn exact_line_matches_independent_simulator() {
    let cases = [
        (BundlePmf::deterministic(2), 10usize, 1.0, 1.0),
        (BundlePmf::deterministic(3), 12, 0.7, 1.5),
        (BundlePmf::uniform_range(1, 3).unwrap(), 9, 1.0, 0.8),
        (BundlePmf::truncated_poisson(10.0, 20).unwrap(), 30, 0.5, 1.0),
    ];
    for (i, (pmf, n, lambda, t)) in cases.into_iter().enumerate() {
        let tab = GammaTable::build(&pmf, n).unwrap();
        let exact = tab
            .expected_pickups_line(&ExpectationQuery { t, n, lambda })
            .unwrap();
        let (mean, stderr) = line_mc(n, lambda, &pmf, t, 100_000, 1000 + i as u64);
        assert!(
            (mean - exact).abs() <= 3.0 * stderr,
            "case {i}: mc {mean} vs exact {exact} (3se = {})",
            3.0 * stderr
        );
    }
}

#[test]
fn exact_line_matches_simulator_across_time() {
    // One pmf, several horizons: catches errors in the exponents.
    let pmf = BundlePmf::uniform_range(1, 2).unwrap();
    let n = 8;
    let tab = GammaTable::build(&pmf, n).unwrap();
    for (i, t) in [0.25, 1.0, 4.0].into_iter().enumerate() {
        let exact = tab
            .expected_pickups_line(&ExpectationQuery { t, n, lambda: 1.0 })
            .unwrap();
        let (mean, stderr) = line_mc(n, 1.0, &pmf, t, 60_000, 7000 + i as u64);
        assert!(
            (mean - exact).abs() <= 3.0 * stderr,
            "t={t}: mc {mean} vs exact {exact} (3se = {})",
            3.0 * stderr
        );
    }
}
