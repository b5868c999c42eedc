//! Expected pickup counts for the discrete sequential packing model of
//! crowdsourced last-mile delivery, with the pricing machinery built on top.
//!
//! Packages are arranged on a circle along a TSP tour; private drivers
//! request bundles of consecutive packages at Poisson times and a request is
//! accepted only if every package in the bundle is still available. The
//! crate computes the expected number of packages picked up by a deadline
//! exactly (triangular coefficient tables), in the large-n limit (quadrature
//! of the limiting proportion), and by simulation. Those expectations drive
//! the per-package reward scheme and the incentive-rate optimization of a
//! mixed private-driver/van delivery strategy against a van-only baseline.

pub mod asymptotic;
pub mod bundle;
pub mod exact;
pub mod numeric;
pub mod pricing;
pub mod routing;
pub mod scenarios;
pub mod sim;

pub use asymptotic::{alpha, alpha_pinsky, convergence_gap, q_hat, AlphaEstimate, AlphaQuery};
pub use bundle::{BundlePmf, PmfError};
pub use exact::{ExactError, ExpectationQuery, GammaTable, GAMMA_STABILITY_CAP};
pub use pricing::{
    advantage_condition, asymptotic_advantage, bundle_prices, delivery_time,
    expected_private_cost, leftover_van_cost, optimize_incentive, package_price, total_cost,
    van_only_cost, z_bounds, CProvider, CostParams, IncentiveModel, InstanceSummary,
    PricingError,
};
pub use scenarios::{
    default_params, gen_three_clusters, gen_uniform_square, objective_curve, run_case_study,
    three_cluster_points, CaseStudyConfig, CaseStudyReport, DepotPlacement, Scenario,
    ScenarioError, ScenarioKind, SeedOutcome,
};
pub use routing::{
    cvrp_bounds, cvrp_continuous, cvrp_solve, neighbor_density, tsp_tour, CvrpSolution, Instance,
    Metric, NeighborDensity, RoutingError, Tour,
};
pub use sim::{
    derive_seed, leftover_destinations, mc_expected_pickups, simulate_circle, McEstimate,
    PickupTrace, SimError,
};
