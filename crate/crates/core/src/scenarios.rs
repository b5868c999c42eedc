//! Destination generators, calibrated default parameters, and the
//! end-to-end case-study pipeline: generate destinations, build the tour,
//! optimize the incentive rate, simulate pickups at the optimum, route the
//! leftovers, and compare the realized mixed cost against van-only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bundle::BundlePmf;
use crate::pricing::{
    optimize_incentive, package_price, total_cost, van_only_cost, z_bounds, CProvider,
    CostParams, IncentiveModel, InstanceSummary, PricingError,
};
use crate::routing::{cvrp_solve, Instance, Metric, RoutingError};
use crate::sim::{derive_seed, leftover_destinations, simulate_circle, SimError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Pricing(#[from] PricingError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("case study needs at least one pickup-simulation seed")]
    NoSeeds,
}

/// Where the depot sits relative to the service square. The region spans
/// `[0, side]²`; the reported route lengths are consistent with a central
/// depot, which is the default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DepotPlacement {
    Center,
    Corner,
    Custom([f64; 2]),
}

impl DepotPlacement {
    pub fn resolve(self, side: f64) -> [f64; 2] {
        match self {
            DepotPlacement::Center => [side / 2.0, side / 2.0],
            DepotPlacement::Corner => [0.0, 0.0],
            DepotPlacement::Custom(p) => p,
        }
    }
}

/// Destination layout for a case study.
#[derive(Debug, Clone)]
pub enum ScenarioKind {
    UniformSquare,
    ThreeClusters,
    /// Pre-loaded destinations (e.g. from a CSV file).
    Custom(Vec<[f64; 2]>),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub n: usize,
    /// Side of the square service region, miles.
    pub side: f64,
    /// Seed for destination generation.
    pub seed: u64,
}

impl Scenario {
    pub fn generate(&self) -> Vec<[f64; 2]> {
        match &self.kind {
            ScenarioKind::UniformSquare => gen_uniform_square(self.n, self.side, self.seed),
            ScenarioKind::ThreeClusters => three_cluster_points(self.n, self.seed),
            ScenarioKind::Custom(points) => points.clone(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            ScenarioKind::UniformSquare => "uniform_square",
            ScenarioKind::ThreeClusters => "three_clusters",
            ScenarioKind::Custom(_) => "custom",
        }
    }
}

/// `n` i.i.d. uniform destinations on `[0, side]²`.
pub fn gen_uniform_square(n: usize, side: f64, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side])
        .collect()
}

struct Ellipse {
    center: [f64; 2],
    half_axes: [f64; 2],
}

impl Ellipse {
    fn contains(&self, p: [f64; 2]) -> bool {
        let dx = (p[0] - self.center[0]) / self.half_axes[0];
        let dy = (p[1] - self.center[1]) / self.half_axes[1];
        dx * dx + dy * dy <= 1.0
    }

    /// Uniform sampling by rejection from the bounding box (acceptance π/4).
    fn sample(&self, rng: &mut ChaCha8Rng) -> [f64; 2] {
        loop {
            let p = [
                self.center[0] + (2.0 * rng.random::<f64>() - 1.0) * self.half_axes[0],
                self.center[1] + (2.0 * rng.random::<f64>() - 1.0) * self.half_axes[1],
            ];
            if self.contains(p) {
                return p;
            }
        }
    }
}

const CLUSTER_ELLIPSES: [Ellipse; 3] = [
    Ellipse { center: [1.5, 4.0], half_axes: [1.2, 1.0] },
    Ellipse { center: [3.8, 3.3], half_axes: [0.8, 1.2] },
    Ellipse { center: [2.5, 1.4], half_axes: [1.2, 1.0] },
];

/// The three-cluster composition scaled to `n` points, keeping the
/// 500:700:500:300 proportions of the 2000-point layout: a uniform
/// background over the 5×5 square plus three elliptic clusters.
pub fn three_cluster_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c_square = n / 4;
    let c_first = n * 7 / 20;
    let c_second = n / 4;
    let c_third = n - c_square - c_first - c_second;
    let mut points = Vec::with_capacity(n);
    for _ in 0..c_square {
        points.push([rng.random::<f64>() * 5.0, rng.random::<f64>() * 5.0]);
    }
    for (ellipse, count) in CLUSTER_ELLIPSES
        .iter()
        .zip([c_first, c_second, c_third])
    {
        for _ in 0..count {
            points.push(ellipse.sample(&mut rng));
        }
    }
    points
}

/// The full-size three-cluster layout: 2000 points as 500 uniform on the
/// square plus 700/500/300 in the three ellipses.
pub fn gen_three_clusters(seed: u64) -> Vec<[f64; 2]> {
    three_cluster_points(2000, seed)
}

/// Calibrated defaults: van costs from fleet studies, private-driver costs
/// from ride-share earnings data, the linear supply response
/// `λ(z) = 0.03 + 0.04z`, and bundle sizes Poisson(10) conditioned on
/// {1..20}. Horizon 8 h over a 5×5-mile region.
pub fn default_params() -> (CostParams, IncentiveModel, BundlePmf) {
    let tau = 97.0 / 3600.0;
    let params = CostParams {
        zeta_p: 0.1284,
        h_p: 16.49,
        v_p: 29.9,
        tau_p: tau,
        zeta_v: 0.550,
        h_v: 42.389,
        v_v: 24.1,
        tau_v: tau,
        capacity: 200,
        area: 25.0,
        beta_vrp: 0.82,
        horizon: 8.0,
    };
    let model = IncentiveModel { slope: 0.04, intercept: 0.03 };
    let pmf = BundlePmf::truncated_poisson(10.0, 20).expect("valid default pmf");
    (params, model, pmf)
}

/// Everything a case-study run needs.
#[derive(Debug, Clone)]
pub struct CaseStudyConfig {
    pub scenario: Scenario,
    pub params: CostParams,
    pub model: IncentiveModel,
    pub pmf: BundlePmf,
    pub depot: DepotPlacement,
    pub metric: Metric,
    /// Number of independent pickup-process replications.
    pub n_seeds: usize,
    /// Base seed for the pickup replications.
    pub base_seed: u64,
}

impl CaseStudyConfig {
    pub fn with_defaults(scenario: Scenario, n_seeds: usize, base_seed: u64) -> Self {
        let (params, model, pmf) = default_params();
        Self {
            scenario,
            params,
            model,
            pmf,
            depot: DepotPlacement::Center,
            metric: Metric::L1,
            n_seeds,
            base_seed,
        }
    }
}

/// Per-seed realized outcome of the mixed strategy.
#[derive(Debug, Clone, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    /// Payments actually made for picked-up packages plus van cost on the
    /// realized leftovers.
    pub cost_mixed: f64,
    pub leftover_count: usize,
    pub cvrp_leftover_len: f64,
    pub improvement_pct: f64,
}

/// Aggregated case-study result.
#[derive(Debug, Clone, Serialize)]
pub struct CaseStudyReport {
    pub scenario: String,
    pub n: usize,
    pub z_star: f64,
    /// Model-expected cost at the optimal incentive rate.
    pub expected_cost_at_z_star: f64,
    pub cost_van_only: f64,
    pub cost_mixed_mean: f64,
    pub cost_mixed_sd: f64,
    /// (van_only - mixed)/van_only, as a fraction.
    pub improvement_pct_mean: f64,
    pub improvement_pct_sd: f64,
    pub leftover_count_mean: f64,
    pub tsp_len: f64,
    pub cvrp_all_len: f64,
    pub cvrp_leftover_len_mean: f64,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<SeedOutcome>,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the full pipeline: generate → tour → optimize z → simulate pickups
/// at λ(z*) per seed → CVRP on leftovers → realized mixed cost → compare to
/// van-only. Seeds run concurrently; aggregation is by seed index.
pub fn run_case_study(config: &CaseStudyConfig) -> Result<CaseStudyReport, ScenarioError> {
    if config.n_seeds == 0 {
        return Err(ScenarioError::NoSeeds);
    }
    let points = config.scenario.generate();
    let depot = config.depot.resolve(config.scenario.side);
    let inst = Instance::build(points.clone(), depot, config.metric)?;
    let summary = InstanceSummary::from_instance(&inst);
    let n = summary.n;
    let provider = CProvider::auto(&config.pmf, n)?;
    let (z_star, expected_cost) =
        optimize_incentive(&summary, &config.params, &config.model, &provider)?;

    let cvrp_all = cvrp_solve(&points, depot, config.params.capacity, config.metric)?;
    let cost_van_only = van_only_cost(cvrp_all.total_length, n, &config.params);

    let lambda_star = config.model.lambda(z_star);
    let mean_bundle = config.pmf.mean();
    let seeds: Vec<u64> = (0..config.n_seeds as u64)
        .map(|s| derive_seed(config.base_seed, s))
        .collect();
    let outcomes: Result<Vec<SeedOutcome>, ScenarioError> = seeds
        .par_iter()
        .map(|&seed| {
            let trace =
                simulate_circle(n, lambda_star, &config.pmf, config.params.horizon, seed);
            let leftover_pts = leftover_destinations(&trace, &inst)?;
            let cvrp_left =
                cvrp_solve(&leftover_pts, depot, config.params.capacity, config.metric)?;
            let mut leftover_mask = vec![false; n + 1];
            for &loc in trace.leftover() {
                leftover_mask[loc] = true;
            }
            let mut payments = 0.0;
            for (loc, &left) in leftover_mask.iter().enumerate().skip(1) {
                if !left {
                    payments += package_price(
                        inst.long_haul(loc),
                        inst.local_dist(loc),
                        &config.params,
                        z_star,
                        mean_bundle,
                    )?;
                }
            }
            let van_leftover = config.params.van_mile_rate() * cvrp_left.total_length
                + trace.leftover().len() as f64 * config.params.h_v * config.params.tau_v;
            let cost_mixed = payments + van_leftover;
            Ok(SeedOutcome {
                seed,
                cost_mixed,
                leftover_count: trace.leftover().len(),
                cvrp_leftover_len: cvrp_left.total_length,
                improvement_pct: (cost_van_only - cost_mixed) / cost_van_only,
            })
        })
        .collect();
    let per_seed = outcomes?;

    let (cost_mixed_mean, cost_mixed_sd) =
        mean_sd(&per_seed.iter().map(|o| o.cost_mixed).collect::<Vec<_>>());
    let (improvement_pct_mean, improvement_pct_sd) =
        mean_sd(&per_seed.iter().map(|o| o.improvement_pct).collect::<Vec<_>>());
    let (leftover_count_mean, _) =
        mean_sd(&per_seed.iter().map(|o| o.leftover_count as f64).collect::<Vec<_>>());
    let (cvrp_leftover_len_mean, _) =
        mean_sd(&per_seed.iter().map(|o| o.cvrp_leftover_len).collect::<Vec<_>>());

    Ok(CaseStudyReport {
        scenario: config.scenario.label().to_string(),
        n,
        z_star,
        expected_cost_at_z_star: expected_cost,
        cost_van_only,
        cost_mixed_mean,
        cost_mixed_sd,
        improvement_pct_mean,
        improvement_pct_sd,
        leftover_count_mean,
        tsp_len: summary.tsp_len,
        cvrp_all_len: cvrp_all.total_length,
        cvrp_leftover_len_mean,
        seeds,
        per_seed,
    })
}

/// The expected-cost objective sampled on a uniform z-grid, for plotting.
pub fn objective_curve(
    summary: &InstanceSummary,
    params: &CostParams,
    model: &IncentiveModel,
    provider: &CProvider,
    points: usize,
) -> Result<Vec<(f64, f64)>, PricingError> {
    let (z_lo, z_hi) = z_bounds(params);
    let step = (z_hi - z_lo) / (points.max(2) - 1) as f64;
    (0..points.max(2))
        .map(|i| {
            let z = z_lo + step * i as f64;
            total_cost(z, summary, params, model, provider).map(|c| (z, c))
        })
        .collect()
}
