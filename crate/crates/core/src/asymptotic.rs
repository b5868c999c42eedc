//! Limiting pickup proportion as the number of packages grows.
//!
//! `alpha(t, λ) = lim_{n→∞} pickups(t, n, λ)/n` is computed by quadrature of
//! the closed-form integral representation; the deterministic-bundle special
//! case has an independent closed form (Pinsky) used as a cross-check, and
//! a convergence-gap diagnostic probes the O(1/n) rate of the finite-n
//! expectation against the limit.

use thiserror::Error;

use crate::exact::{ExactError, ExpectationQuery, GammaTable};
use crate::numeric::adaptive_simpson;

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum AsymptoticError {
    #[error("v must lie in [0,1], got {0}")]
    DomainV(f64),
    #[error("lambda must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("quad_tol must lie in (0, 1e-4], got {0}")]
    BadQuadTol(f64),
    #[error("pinsky formula requires m >= 2, got {0}")]
    PinskyNeedsM2(usize),
    #[error("gamma table only covers n <= {n_max}, need {needed}")]
    TableTooSmall { n_max: usize, needed: usize },
    #[error("quadrature did not reach tolerance: value {value}, error estimate {error_estimate}")]
    QuadratureNotConverged { value: f64, error_estimate: f64 },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// An `alpha` evaluation point. The bundle distribution travels with the
/// `GammaTable` passed alongside.
#[derive(Debug, Clone, Copy)]
pub struct AlphaQuery {
    pub t: f64,
    pub lambda: f64,
    pub quad_tol: f64,
}

impl AlphaQuery {
    pub fn new(t: f64, lambda: f64) -> Self {
        Self { t, lambda, quad_tol: DEFAULT_QUAD_TOL }
    }

    pub fn with_tol(t: f64, lambda: f64, quad_tol: f64) -> Self {
        Self { t, lambda, quad_tol }
    }

    fn validate(&self) -> Result<(), AsymptoticError> {
        if self.lambda.is_nan() || self.lambda <= 0.0 {
            return Err(AsymptoticError::NonPositiveLambda(self.lambda));
        }
        if self.quad_tol.is_nan() || self.quad_tol <= 0.0 || self.quad_tol > 1e-4 {
            return Err(AsymptoticError::BadQuadTol(self.quad_tol));
        }
        Ok(())
    }
}

/// Quadrature output: the estimate and the accumulated error bound.
#[derive(Debug, Clone, Copy)]
pub struct AlphaEstimate {
    pub value: f64,
    pub quad_error: f64,
}

/// Kernel of the integral representation:
///
/// ```text
/// q̂(s,v) = 2 v^{m-φ'(1)-1} (1-v) Σ_{i=1}^{m-1} R(s,i)
///        - 2 (1-v)² Σ_{i=1}^{m-1} R(s,i) Σ_{j=m-i}^{m-1} ccdf(j) v^{i+j-φ'(1)-1}
/// ```
///
/// where `R(s,i)` is the exact line expectation at rate `lambda`. All
/// exponents are `>= m - E[B] >= 0`, so `powf` extends continuously to v=0.
pub fn q_hat(s: f64, v: f64, tab: &GammaTable, lambda: f64) -> Result<f64, AsymptoticError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(AsymptoticError::DomainV(v));
    }
    let pmf = tab.pmf();
    let m = pmf.max_size();
    if m == 1 {
        return Ok(0.0);
    }
    if tab.n_max() < m - 1 {
        return Err(AsymptoticError::TableTooSmall { n_max: tab.n_max(), needed: m - 1 });
    }
    let phi1 = pmf.phi_prime(1.0);
    let s = s.max(0.0); // guard rounding when s = t + ln(v)/λ at the lower limit
    let mut remaining = Vec::with_capacity(m - 1);
    for i in 1..m {
        remaining.push(tab.expected_remaining_line(&ExpectationQuery { t: s, n: i, lambda })?);
    }
    let lead = 2.0 * v.powf(m as f64 - phi1 - 1.0) * (1.0 - v);
    let first: f64 = lead * remaining.iter().sum::<f64>();
    let mut second = 0.0;
    for (idx, &r) in remaining.iter().enumerate() {
        let i = idx + 1;
        let mut inner = 0.0;
        for j in (m - i)..m {
            inner += pmf.ccdf(j) * v.powf((i + j) as f64 - phi1 - 1.0);
        }
        second += r * inner;
    }
    Ok(first - 2.0 * (1.0 - v) * (1.0 - v) * second)
}

/// Limiting proportion of packages picked up by time `t`:
///
/// ```text
/// alpha(t,λ) = 1 - ∫_{e^{-λt}}^1 e^{2(φ(u)-φ(1))} q̂(t + ln(u)/λ, u) du
///            - (m-(m-1)e^{-λt}) e^{2(φ(e^{-λt})-φ(1)) - λt(m-φ'(1))}
/// ```
pub fn alpha(q: &AlphaQuery, tab: &GammaTable) -> Result<AlphaEstimate, AsymptoticError> {
    q.validate()?;
    if q.t < 0.0 {
        return Ok(AlphaEstimate { value: 0.0, quad_error: 0.0 });
    }
    let pmf = tab.pmf();
    let m = pmf.max_size() as f64;
    let phi1 = pmf.phi_prime(1.0);
    let lo = (-q.lambda * q.t).exp();
    let phi_one = pmf.phi(1.0);

    let integrand = |u: f64| -> f64 {
        let s = q.t + u.ln() / q.lambda;
        let qh = q_hat(s, u, tab, q.lambda).unwrap_or(f64::NAN);
        (2.0 * (pmf.phi(u) - phi_one)).exp() * qh
    };
    let quad = adaptive_simpson(integrand, lo, 1.0, q.quad_tol);

    let boundary = (m - (m - 1.0) * lo)
        * (2.0 * (pmf.phi(lo) - phi_one) - q.lambda * q.t * (m - phi1)).exp();
    let value = 1.0 - quad.value - boundary;
    if !quad.converged || !value.is_finite() {
        return Err(AsymptoticError::QuadratureNotConverged {
            value,
            error_estimate: quad.error_estimate,
        });
    }
    Ok(AlphaEstimate { value, quad_error: quad.error_estimate })
}

/// Deterministic-bundle limit `alpha(∞)` via the Pinsky closed form
///
/// ```text
/// m · exp(-2 Σ_{j=1}^{m-1} 1/j) · ∫_0^1 exp(2 Σ_{j=1}^{m-1} u^j/j) du
/// ```
///
/// valid for `P(B=m)=1`, `m >= 2`; independent of λ.
pub fn alpha_pinsky(m: usize, quad_tol: f64) -> Result<AlphaEstimate, AsymptoticError> {
    if m < 2 {
        return Err(AsymptoticError::PinskyNeedsM2(m));
    }
    if quad_tol.is_nan() || quad_tol <= 0.0 || quad_tol > 1e-4 {
        return Err(AsymptoticError::BadQuadTol(quad_tol));
    }
    let harmonic: f64 = (1..m).map(|j| 1.0 / j as f64).sum();
    let series = |u: f64| -> f64 {
        let mut acc = 0.0;
        for j in (1..m).rev() {
            acc = (acc + 1.0 / j as f64) * u;
        }
        acc
    };
    let quad = adaptive_simpson(|u| (2.0 * series(u)).exp(), 0.0, 1.0, quad_tol);
    let value = m as f64 * (-2.0 * harmonic).exp() * quad.value;
    if !quad.converged {
        return Err(AsymptoticError::QuadratureNotConverged {
            value,
            error_estimate: quad.error_estimate,
        });
    }
    Ok(AlphaEstimate { value, quad_error: quad.error_estimate })
}

/// Scaled convergence diagnostic `n · |C(t,n,λ)/n - alpha(t,λ)|`; the
/// finite-n proportion converges at rate O(1/n), so this stays bounded.
pub fn convergence_gap(
    t: f64,
    lambda: f64,
    n: usize,
    tab: &GammaTable,
) -> Result<f64, AsymptoticError> {
    let c = tab.expected_pickups_circle(&ExpectationQuery { t, n, lambda })?;
    let a = alpha(&AlphaQuery::new(t, lambda), tab)?;
    Ok(n as f64 * (c / n as f64 - a.value).abs())
}
