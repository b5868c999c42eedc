//! Stochastic simulation of the bundle-request/pickup process on a circle of
//! `n` package locations: the Monte Carlo oracle for every analytic result.
//!
//! Requests arrive as a single Poisson stream at rate `n·λ` with a uniform
//! location mark and an independent size mark, which is equal in law to `n`
//! independent rate-λ marked processes but costs O(events) instead of O(n)
//! heaps. A request is accepted iff every position it covers (mod n) is
//! still available.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use thiserror::Error;

use crate::bundle::BundlePmf;
use crate::numeric::splitmix64;
use crate::routing::Instance;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("trace has n={trace_n} locations but instance has {instance_n} points")]
    SizeMismatch { trace_n: usize, instance_n: usize },
    #[error("estimator needs at least 2 replications, got {0}")]
    TooFewReps(usize),
}

/// One accepted bundle request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accepted {
    /// Arrival time in hours.
    pub time: f64,
    /// First covered location, 1-based along the tour circle.
    pub location: usize,
    /// Bundle size.
    pub size: usize,
}

/// One simulated realization of the pickup process on `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct PickupTrace {
    n: usize,
    horizon: f64,
    accepted: Vec<Accepted>,
    /// Cumulative picked counts aligned with `accepted`.
    cum_sizes: Vec<usize>,
    /// Still-available locations at the horizon, 1-based, ascending.
    leftover: Vec<usize>,
}

impl PickupTrace {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Accepted requests in strictly increasing time order.
    pub fn accepted(&self) -> &[Accepted] {
        &self.accepted
    }

    /// Locations (1-based) never covered by an accepted bundle.
    pub fn leftover(&self) -> &[usize] {
        &self.leftover
    }

    /// Number of packages picked up by time `t` (step function; saturates at
    /// the horizon).
    pub fn picked_count_at(&self, t: f64) -> usize {
        let idx = self.accepted.partition_point(|a| a.time <= t);
        if idx == 0 {
            0
        } else {
            self.cum_sizes[idx - 1]
        }
    }

    /// Total packages picked up over the whole window.
    pub fn picked_count(&self) -> usize {
        self.n - self.leftover.len()
    }
}

/// Simulates the circle pickup process. Deterministic for a fixed seed.
pub fn simulate_circle(
    n: usize,
    lambda: f64,
    pmf: &BundlePmf,
    horizon: f64,
    seed: u64,
) -> PickupTrace {
    assert!(n >= 1, "need at least one package");
    assert!(lambda >= 0.0 && horizon >= 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut free = vec![true; n];
    let mut free_count = n;
    let mut accepted = Vec::new();
    let rate = n as f64 * lambda;
    if rate > 0.0 && horizon > 0.0 {
        let exp = Exp::new(rate).expect("positive rate");
        let mut t = 0.0;
        loop {
            t += exp.sample(&mut rng);
            if t > horizon || free_count == 0 {
                break;
            }
            let loc = rng.random_range(0..n);
            let size = pmf.sample(&mut rng);
            if size > free_count {
                continue;
            }
            let fits = (0..size).all(|off| free[(loc + off) % n]);
            if fits {
                for off in 0..size {
                    free[(loc + off) % n] = false;
                }
                free_count -= size;
                accepted.push(Accepted { time: t, location: loc + 1, size });
            }
        }
    }
    let mut cum_sizes = Vec::with_capacity(accepted.len());
    let mut acc = 0;
    for a in &accepted {
        acc += a.size;
        cum_sizes.push(acc);
    }
    let leftover: Vec<usize> = (1..=n).filter(|&i| free[i - 1]).collect();
    debug_assert_eq!(acc + leftover.len(), n);
    PickupTrace { n, horizon, accepted, cum_sizes, leftover }
}

/// Derives the seed for replication `rep` from a base seed.
pub fn derive_seed(seed: u64, rep: u64) -> u64 {
    splitmix64(seed ^ splitmix64(rep))
}

/// Monte Carlo estimate with standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Estimates the expected circle pickup count at the horizon over `reps`
/// independent replications. Replications run in parallel but combine by
/// replication index, so the estimate is deterministic for a fixed
/// `(seed, reps)` regardless of scheduling.
pub fn mc_expected_pickups(
    n: usize,
    lambda: f64,
    pmf: &BundlePmf,
    horizon: f64,
    reps: usize,
    seed: u64,
) -> Result<McEstimate, SimError> {
    if reps < 2 {
        return Err(SimError::TooFewReps(reps));
    }
    let counts: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            simulate_circle(n, lambda, pmf, horizon, derive_seed(seed, rep)).picked_count() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (reps as f64 - 1.0);
    Ok(McEstimate { mean, stderr: (var / reps as f64).sqrt() })
}

/// Destinations of the leftover packages, in tour order, ready for CVRP
/// routing. Location `i` maps to the `i`-th destination along the instance's
/// tour.
pub fn leftover_destinations(
    trace: &PickupTrace,
    inst: &Instance,
) -> Result<Vec<[f64; 2]>, SimError> {
    if trace.n() != inst.len() {
        return Err(SimError::SizeMismatch { trace_n: trace.n(), instance_n: inst.len() });
    }
    Ok(trace
        .leftover()
        .iter()
        .map(|&loc| inst.ordered_point(loc))
        .collect())
}
