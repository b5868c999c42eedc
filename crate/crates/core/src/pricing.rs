//! Per-package reward scheme, expected total delivery cost, and the
//! incentive-rate optimization.
//!
//! A driver's payment rate is `h_p + z`: opportunity cost plus the incentive
//! rate `z`, the single decision variable. Package prices prorate the long
//! haul over the mean bundle size so that the profit rate is identical
//! across packages, which is what justifies a location-independent request
//! rate `λ(z)` in the packing model.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotic::{alpha, AlphaQuery, AsymptoticError};
use crate::bundle::BundlePmf;
use crate::exact::{ExactError, ExpectationQuery, GammaTable, GAMMA_STABILITY_CAP};
use crate::numeric::golden_min;
use crate::routing::Instance;

#[derive(Debug, Error)]
pub enum PricingError {
    #[error("payment rate h_p + z must be nonnegative (h_p={h_p}, z={z})")]
    NegativePayRate { h_p: f64, z: f64 },
    #[error("bundle start {start} or size {size} invalid for an instance of {n} points")]
    InvalidBundle { start: usize, size: usize, n: usize },
    #[error("cost parameter {name} must be positive, got {value}")]
    BadParam { name: &'static str, value: f64 },
    #[error("incentive slope must be nonnegative, got {0}")]
    NegativeSlope(f64),
    #[error("objective could not be evaluated anywhere on the feasible interval")]
    NoFeasibleEvaluation,
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Asymptotic(#[from] AsymptoticError),
}

/// Economic constants of the two delivery modes. Units: `$`/mile for ζ,
/// `$`/hour for h, miles/hour for v, hours for τ and the horizon, square
/// miles for the area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostParams {
    pub zeta_p: f64,
    pub h_p: f64,
    pub v_p: f64,
    pub tau_p: f64,
    pub zeta_v: f64,
    pub h_v: f64,
    pub v_v: f64,
    pub tau_v: f64,
    /// Van capacity in packages.
    pub capacity: usize,
    /// Area of the service region, square miles.
    pub area: f64,
    /// Continuous-approximation constant (0.82 for L1).
    pub beta_vrp: f64,
    /// Length of the private-driver pickup window, hours.
    pub horizon: f64,
}

impl CostParams {
    pub fn validate(&self) -> Result<(), PricingError> {
        let positives = [
            ("zeta_p", self.zeta_p),
            ("h_p", self.h_p),
            ("v_p", self.v_p),
            ("zeta_v", self.zeta_v),
            ("h_v", self.h_v),
            ("v_v", self.v_v),
            ("area", self.area),
            ("beta_vrp", self.beta_vrp),
            ("horizon", self.horizon),
            ("capacity", self.capacity as f64),
        ];
        for (name, value) in positives {
            if value.is_nan() || value <= 0.0 {
                return Err(PricingError::BadParam { name, value });
            }
        }
        for (name, value) in [("tau_p", self.tau_p), ("tau_v", self.tau_v)] {
            if value.is_nan() || value < 0.0 {
                return Err(PricingError::BadParam { name, value });
            }
        }
        Ok(())
    }

    /// Composite per-mile van rate ζ_v + h_v/v_v.
    pub fn van_mile_rate(&self) -> f64 {
        self.zeta_v + self.h_v / self.v_v
    }
}

/// Linear supply response: `λ(z) = max(0, intercept + slope·z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncentiveModel {
    pub slope: f64,
    pub intercept: f64,
}

impl IncentiveModel {
    pub fn new(intercept: f64, slope: f64) -> Result<Self, PricingError> {
        if slope < 0.0 {
            return Err(PricingError::NegativeSlope(slope));
        }
        Ok(Self { slope, intercept })
    }

    pub fn lambda(&self, z: f64) -> f64 {
        (self.intercept + self.slope * z).max(0.0)
    }
}

/// The per-instance aggregates the cost function consumes.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    pub n: usize,
    /// Mean depot distance r̄(n).
    pub r_bar: f64,
    pub tsp_len: f64,
    /// Per-location depot distances, tour order.
    pub long_hauls: Vec<f64>,
    /// Per-location adjacent-gap averages, tour order.
    pub locals: Vec<f64>,
}

impl InstanceSummary {
    pub fn from_instance(inst: &Instance) -> Self {
        Self {
            n: inst.len(),
            r_bar: inst.mean_long_haul(),
            tsp_len: inst.tour().length,
            long_hauls: inst.long_hauls().to_vec(),
            locals: inst.locals().to_vec(),
        }
    }

    pub fn sum_long_haul(&self) -> f64 {
        self.long_hauls.iter().sum()
    }
}

/// Source of the expected circle pickup count `C(T, n, λ)`: the exact table
/// when `n` fits under the stability cap, the `n·alpha` limit otherwise.
#[derive(Debug, Clone)]
pub enum CProvider {
    Exact(Arc<GammaTable>),
    Asymptotic { table: Arc<GammaTable>, quad_tol: f64 },
}

impl CProvider {
    /// Picks the exact table for `n` at or below the stability cap, else the
    /// asymptotic provider (whose table only needs rows below the maximum
    /// bundle size).
    pub fn auto(pmf: &BundlePmf, n: usize) -> Result<Self, PricingError> {
        if n <= GAMMA_STABILITY_CAP {
            Ok(CProvider::Exact(GammaTable::cached(pmf, n.max(pmf.max_size()))?))
        } else {
            let rows = (pmf.max_size() - 1).max(1);
            Ok(CProvider::Asymptotic {
                table: GammaTable::cached(pmf, rows)?,
                quad_tol: crate::asymptotic::DEFAULT_QUAD_TOL,
            })
        }
    }

    pub fn pmf(&self) -> &BundlePmf {
        match self {
            CProvider::Exact(tab) => tab.pmf(),
            CProvider::Asymptotic { table, .. } => table.pmf(),
        }
    }

    /// Expected pickups on a circle of `n` by time `t` at request rate
    /// `lambda` (zero rate short-circuits to zero).
    pub fn expected_pickups(&self, t: f64, n: usize, lambda: f64) -> Result<f64, PricingError> {
        if lambda <= 0.0 || t <= 0.0 {
            return Ok(0.0);
        }
        match self {
            CProvider::Exact(tab) => {
                Ok(tab.expected_pickups_circle(&ExpectationQuery { t, n, lambda })?)
            }
            CProvider::Asymptotic { table, quad_tol } => {
                let a = alpha(&AlphaQuery::with_tol(t, lambda, *quad_tol), table)?;
                Ok(n_clamped(n as f64 * a.value, n))
            }
        }
    }
}

fn n_clamped(c: f64, n: usize) -> f64 {
    c.clamp(0.0, n as f64)
}

/// Reward offered for delivering one package with depot distance
/// `long_haul` and tour-local distance `local`:
///
/// ```text
/// ζ_p·(r/E[B] + d) + (h_p + z)·(r/(E[B]·v_p) + d/v_p + τ_p)
/// ```
pub fn package_price(
    long_haul: f64,
    local: f64,
    params: &CostParams,
    z: f64,
    mean_bundle: f64,
) -> Result<f64, PricingError> {
    if params.h_p + z < 0.0 {
        return Err(PricingError::NegativePayRate { h_p: params.h_p, z });
    }
    let pay_rate = params.h_p + z;
    Ok(params.zeta_p * (long_haul / mean_bundle + local)
        + pay_rate * delivery_time(long_haul, local, params, mean_bundle))
}

/// Estimated time to deliver one package: `r/(E[B]·v_p) + d/v_p + τ_p`.
pub fn delivery_time(long_haul: f64, local: f64, params: &CostParams, mean_bundle: f64) -> f64 {
    long_haul / (mean_bundle * params.v_p) + local / params.v_p + params.tau_p
}

/// Prices a bundle of `size` consecutive packages starting at tour location
/// `start` (1-based, wrapping) both ways: `price1` from the actual bundle
/// travel distance, `price2` as the sum of per-package prorated prices with
/// the bundle's own size. Their gap is small when tour neighbors are close.
pub fn bundle_prices(
    start: usize,
    size: usize,
    inst: &Instance,
    params: &CostParams,
    z: f64,
) -> Result<(f64, f64), PricingError> {
    let n = inst.len();
    if start < 1 || start > n || size < 1 || size > n {
        return Err(PricingError::InvalidBundle { start, size, n });
    }
    if params.h_p + z < 0.0 {
        return Err(PricingError::NegativePayRate { h_p: params.h_p, z });
    }
    let pay_rate = params.h_p + z;
    let k = size as f64;

    let r_first = inst.long_haul(start);
    let mut travel = 0.0;
    for off in 0..size - 1 {
        let loc = (start - 1 + off) % n + 1;
        travel += inst.gap_after(loc);
    }
    let price1 = params.zeta_p * (r_first + travel)
        + pay_rate * (r_first / params.v_p + travel / params.v_p + k * params.tau_p);

    let mut sum_r = 0.0;
    let mut sum_d = 0.0;
    for off in 0..size {
        let loc = (start - 1 + off) % n + 1;
        sum_r += inst.long_haul(loc);
        sum_d += inst.local_dist(loc);
    }
    let price2 = params.zeta_p * (sum_r / k + sum_d)
        + pay_rate * (sum_r / (k * params.v_p) + sum_d / params.v_p + k * params.tau_p);
    Ok((price1, price2))
}

/// Expected payout to private drivers over the pickup window:
///
/// ```text
/// (C/n)·(ζ_p + (h_p+z)/v_p)·(Σr/E[B] + tsp_len) + C·(h_p+z)·τ_p
/// ```
pub fn expected_private_cost(
    z: f64,
    summary: &InstanceSummary,
    params: &CostParams,
    model: &IncentiveModel,
    provider: &CProvider,
) -> Result<f64, PricingError> {
    if params.h_p + z < 0.0 {
        return Err(PricingError::NegativePayRate { h_p: params.h_p, z });
    }
    let c = provider.expected_pickups(params.horizon, summary.n, model.lambda(z))?;
    let mean_bundle = provider.pmf().mean();
    let pay_rate = params.h_p + z;
    Ok(
        (c / summary.n as f64)
            * (params.zeta_p + pay_rate / params.v_p)
            * (summary.sum_long_haul() / mean_bundle + summary.tsp_len)
            + c * pay_rate * params.tau_p,
    )
}

/// Expected cost of van delivery for the leftover packages, via the
/// continuous CVRP approximation:
///
/// ```text
/// (ζ_v + h_v/v_v)·(2(n-C)·r̄/V + β·√((n-C)·A)) + (n-C)·h_v·τ_v
/// ```
pub fn leftover_van_cost(
    z: f64,
    summary: &InstanceSummary,
    params: &CostParams,
    model: &IncentiveModel,
    provider: &CProvider,
) -> Result<f64, PricingError> {
    let c = provider.expected_pickups(params.horizon, summary.n, model.lambda(z))?;
    let k = (summary.n as f64 - c).max(0.0);
    Ok(params.van_mile_rate()
        * crate::routing::cvrp_continuous(k, summary.r_bar, params.area, params.capacity, params.beta_vrp)
        + k * params.h_v * params.tau_v)
}

/// The expected-cost objective: private payouts plus leftover van cost.
pub fn total_cost(
    z: f64,
    summary: &InstanceSummary,
    params: &CostParams,
    model: &IncentiveModel,
    provider: &CProvider,
) -> Result<f64, PricingError> {
    Ok(expected_private_cost(z, summary, params, model, provider)?
        + leftover_van_cost(z, summary, params, model, provider)?)
}

/// Cost of the van-only strategy given a concrete CVRP length:
/// `(ζ_v + h_v/v_v)·cvrp_len + n·h_v·τ_v`.
pub fn van_only_cost(cvrp_len: f64, n: usize, params: &CostParams) -> f64 {
    params.van_mile_rate() * cvrp_len + n as f64 * params.h_v * params.tau_v
}

/// Feasible incentive interval. The lower bound keeps the payment rate
/// nonnegative; the upper bound is where private delivery stops being
/// cheaper per mile and per package than the vans:
///
/// ```text
/// -h_p <= z <= max{ (ζ_v + h_v/v_v - ζ_p)·v_p, h_v·τ_v/τ_p } - h_p
/// ```
///
/// With `τ_p = 0` the ratio candidate is dropped (it would be unbounded).
pub fn z_bounds(params: &CostParams) -> (f64, f64) {
    let z_lo = -params.h_p;
    let speed_term = (params.van_mile_rate() - params.zeta_p) * params.v_p;
    let cap = if params.tau_p > 0.0 {
        speed_term.max(params.h_v * params.tau_v / params.tau_p)
    } else {
        speed_term
    };
    let z_hi = cap - params.h_p;
    (z_lo, z_hi.max(z_lo))
}

/// Minimizes the expected-cost objective over the feasible incentive
/// interval: a 64-point grid scan (certificate of near-optimality) followed
/// by golden-section refinement around the best grid point.
pub fn optimize_incentive(
    summary: &InstanceSummary,
    params: &CostParams,
    model: &IncentiveModel,
    provider: &CProvider,
) -> Result<(f64, f64), PricingError> {
    params.validate()?;
    let (z_lo, z_hi) = z_bounds(params);
    let objective = |z: f64| -> f64 {
        total_cost(z, summary, params, model, provider).unwrap_or(f64::INFINITY)
    };
    const GRID: usize = 64;
    let step = (z_hi - z_lo) / (GRID - 1) as f64;
    let mut best_z = z_lo;
    let mut best_cost = f64::INFINITY;
    for i in 0..GRID {
        let z = z_lo + step * i as f64;
        let c = objective(z);
        if c < best_cost {
            best_cost = c;
            best_z = z;
        }
    }
    if !best_cost.is_finite() {
        return Err(PricingError::NoFeasibleEvaluation);
    }
    let lo = (best_z - step).max(z_lo);
    let hi = (best_z + step).min(z_hi);
    let (z_ref, cost_ref) = golden_min(objective, lo, hi, 1e-7 * (z_hi - z_lo).max(1.0));
    if cost_ref < best_cost {
        Ok((z_ref, cost_ref))
    } else {
        Ok((best_z, best_cost))
    }
}

/// Asymptotic per-package cost gap bound of the mixed strategy versus
/// van-only (negative values favor the mixed strategy):
///
/// ```text
/// -α·( (ζ_v+h_v/v_v)·2r*/V - (ζ_p+h_p/v_p)·r*/E[B] - (h_p·τ_p - h_v·τ_v)
///      - z·(r*/(v_p·E[B]) + τ_p) )
/// ```
pub fn asymptotic_advantage(
    params: &CostParams,
    r_star: f64,
    mean_bundle: f64,
    z: f64,
    alpha_t: f64,
) -> f64 {
    -alpha_t
        * (advantage_condition(params, r_star, mean_bundle)
            - z * (r_star / (params.v_p * mean_bundle) + params.tau_p))
}

/// Left side of the sufficient condition for the mixed strategy to win at
/// some feasible `z`:
///
/// ```text
/// (ζ_v+h_v/v_v)·2r*/V - (ζ_p+h_p/v_p)·r*/E[B] - (h_p·τ_p - h_v·τ_v) > 0
/// ```
pub fn advantage_condition(params: &CostParams, r_star: f64, mean_bundle: f64) -> f64 {
    params.van_mile_rate() * 2.0 * r_star / params.capacity as f64
        - (params.zeta_p + params.h_p / params.v_p) * r_star / mean_bundle
        - (params.h_p * params.tau_p - params.h_v * params.tau_v)
}
