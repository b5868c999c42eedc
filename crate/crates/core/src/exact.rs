//! Exact expected-pickup computation for line and circle topologies.
//!
//! The expected number of packages still unclaimed at time `t` when `n`
//! packages sit on a line is an exponential mixture
//!
//! ```text
//! remaining(t, n, λ) = Σ_{i=1}^n γ_{n,i} · exp(-λ · S_i · t),   S_i = Σ_{j<=i} cdf(j)
//! ```
//!
//! whose coefficients satisfy a triangular recursion (λ-free, so a table is
//! built once per pmf and reused for every `(t, λ)` query). The circle
//! variant uses a companion table `γ̃` obtained by conditioning on the first
//! accepted request.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use thiserror::Error;

use crate::bundle::BundlePmf;
use crate::numeric::KahanSum;

/// Largest table size built without explicit opt-in. The recursion is
/// numerically benign (coefficients stay positive and O(n)), but build cost
/// and memory grow quadratically, and tables released at this size are
/// validated against the Monte Carlo oracle in the test suite.
pub const GAMMA_STABILITY_CAP: usize = 2000;

#[derive(Debug, Error, PartialEq)]
pub enum ExactError {
    #[error("requested table size {requested} exceeds the stability cap {cap}")]
    CapExceeded { requested: usize, cap: usize },
    #[error("query n={n} exceeds the built table size n_max={n_max}")]
    BeyondTable { n: usize, n_max: usize },
    #[error("circle formula requires n >= m (got n={n}, m={m})")]
    CircleTooFew { n: usize, m: usize },
    #[error("n must be at least 1")]
    ZeroPackages,
    #[error("ode residual requires t > h > 0 (got t={t}, h={h})")]
    BadResidualWindow { t: f64, h: f64 },
}

/// A `(t, n, λ)` evaluation point: `t` hours, `n` packages, `λ` requests per
/// location per hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationQuery {
    pub t: f64,
    pub n: usize,
    pub lambda: f64,
}

impl ExpectationQuery {
    pub fn new(t: f64, n: usize, lambda: f64) -> Self {
        assert!(t >= 0.0, "t must be nonnegative");
        assert!(lambda >= 0.0, "lambda must be nonnegative");
        Self { t, n, lambda }
    }
}

/// Lower-triangular array stored row by row; 1-based `(n, i)` accessors.
#[derive(Debug, Clone)]
struct Triangular {
    rows: Vec<Box<[f64]>>,
}

impl Triangular {
    fn get(&self, n: usize, i: usize) -> f64 {
        self.rows[n - 1][i - 1]
    }

    fn row(&self, n: usize) -> &[f64] {
        &self.rows[n - 1]
    }
}

/// Triangular coefficient tables for the exact line and circle formulas,
/// together with the cumulative CDF sums appearing in the exponents.
///
/// Immutable after construction; evaluation methods are pure and safe to
/// call concurrently.
#[derive(Debug, Clone)]
pub struct GammaTable {
    pmf: BundlePmf,
    n_max: usize,
    gamma: Triangular,
    gamma_tilde: Triangular,
    /// cum_cdf[i-1] = S_i = Σ_{j=1}^i cdf(j) for i = 1..=n_max.
    cum_cdf: Vec<f64>,
}

type TableCache = Mutex<HashMap<(u64, usize), Arc<GammaTable>>>;

static TABLE_CACHE: Lazy<TableCache> = Lazy::new(|| Mutex::new(HashMap::new()));

impl GammaTable {
    /// Builds both coefficient tables up to `n_max` rows.
    pub fn build(pmf: &BundlePmf, n_max: usize) -> Result<Self, ExactError> {
        if n_max == 0 {
            return Err(ExactError::ZeroPackages);
        }
        if n_max > GAMMA_STABILITY_CAP {
            return Err(ExactError::CapExceeded { requested: n_max, cap: GAMMA_STABILITY_CAP });
        }
        let m = pmf.max_size();
        let cdf: Vec<f64> = (1..=m.min(n_max)).map(|k| pmf.cdf(k)).collect();
        let cdf_at = |k: usize| -> f64 {
            if k >= m {
                1.0
            } else {
                cdf[k - 1]
            }
        };
        let mut cum_cdf = Vec::with_capacity(n_max);
        let mut s = 0.0;
        for k in 1..=n_max {
            s += cdf_at(k);
            cum_cdf.push(s);
        }
        let s_at = |i: usize| -> f64 {
            if i == 0 {
                0.0
            } else {
                cum_cdf[i - 1]
            }
        };

        // Line-topology coefficients. For rows where cdf(n) = 0 (n below the
        // minimum support) the boundary value is a row of ones. Otherwise
        //   γ_{n,i} = 2 Σ_{j=1}^{n-i} cdf(j) γ_{n-j,i} / (S_n - S_i),  i < n,
        //   γ_{n,n} = n - Σ_{i<n} γ_{n,i}.
        // The numerator saturates for j >= m (cdf = 1), so it splits into an
        // O(m) window plus a running column prefix sum, keeping the whole
        // build at O(n_max^2 · m).
        let mut rows: Vec<Box<[f64]>> = Vec::with_capacity(n_max);
        // prefix[i-1] = Σ_{r=i}^{n-m} γ_{r,i}, maintained as n advances.
        let mut prefix = vec![0.0; n_max];
        for n in 1..=n_max {
            if n > m {
                let r = n - m;
                for i in 1..=r {
                    prefix[i - 1] += rows[r - 1][i - 1];
                }
            }
            let mut row = vec![0.0; n].into_boxed_slice();
            if cdf_at(n) == 0.0 {
                row.fill(1.0);
            } else {
                let mut tail = KahanSum::new();
                for i in 1..n {
                    let mut num = KahanSum::new();
                    let j_max = (n - i).min(m - 1);
                    for j in 1..=j_max {
                        let f = cdf_at(j);
                        if f > 0.0 {
                            num.add(f * rows[n - j - 1][i - 1]);
                        }
                    }
                    if n - i >= m {
                        num.add(prefix[i - 1]);
                    }
                    let denom = s_at(n) - s_at(i);
                    debug_assert!(denom > 0.0);
                    let g = 2.0 * num.value() / denom;
                    row[i - 1] = g;
                    tail.add(g);
                }
                row[n - 1] = n as f64 - tail.value();
            }
            rows.push(row);
        }
        let gamma = Triangular { rows };

        // Circle-topology coefficients:
        //   γ̃_{n,i} = Σ_{k=1}^{n-i} pmf(k) γ_{n-k,i} / (1 - S_i/n),  i < n,
        //   γ̃_{n,n} = n - Σ_{i<n} γ̃_{n,i}.
        // The denominator is provably positive for i <= n-1 (S_i <= i < n).
        let mut trows: Vec<Box<[f64]>> = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let mut row = vec![0.0; n].into_boxed_slice();
            let mut tail = KahanSum::new();
            for i in 1..n {
                let mut num = KahanSum::new();
                let k_max = (n - i).min(m);
                for k in 1..=k_max {
                    let f = pmf.pmf(k);
                    if f > 0.0 {
                        num.add(f * gamma.get(n - k, i));
                    }
                }
                let denom = 1.0 - s_at(i) / n as f64;
                debug_assert!(denom > 0.0);
                let g = num.value() / denom;
                row[i - 1] = g;
                tail.add(g);
            }
            row[n - 1] = n as f64 - tail.value();
            trows.push(row);
        }
        let gamma_tilde = Triangular { rows: trows };

        Ok(Self { pmf: pmf.clone(), n_max, gamma, gamma_tilde, cum_cdf })
    }

    /// Builds or fetches a shared table for `(pmf, n_max)`, keyed by the pmf
    /// hash. λ and t enter only at evaluation time.
    pub fn cached(pmf: &BundlePmf, n_max: usize) -> Result<Arc<Self>, ExactError> {
        let key = (pmf.key(), n_max);
        if let Some(tab) = TABLE_CACHE.lock().unwrap().get(&key) {
            return Ok(Arc::clone(tab));
        }
        let built = Arc::new(Self::build(pmf, n_max)?);
        TABLE_CACHE
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| Arc::clone(&built));
        Ok(built)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn pmf(&self) -> &BundlePmf {
        &self.pmf
    }

    /// Line coefficient γ_{n,i} (1-based).
    pub fn gamma(&self, n: usize, i: usize) -> f64 {
        self.gamma.get(n, i)
    }

    /// Circle coefficient γ̃_{n,i} (1-based).
    pub fn gamma_tilde(&self, n: usize, i: usize) -> f64 {
        self.gamma_tilde.get(n, i)
    }

    /// S_i = Σ_{j=1}^i cdf(j).
    pub fn cum_cdf(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.cum_cdf[i - 1]
        }
    }

    fn check_n(&self, n: usize) -> Result<(), ExactError> {
        if n == 0 {
            Err(ExactError::ZeroPackages)
        } else if n > self.n_max {
            Err(ExactError::BeyondTable { n, n_max: self.n_max })
        } else {
            Ok(())
        }
    }

    /// Expected number of packages remaining at time `t` on a line of `n`.
    /// Returns `n` when no bundle can ever fit (`S_n = 0`).
    pub fn expected_remaining_line(&self, q: &ExpectationQuery) -> Result<f64, ExactError> {
        self.check_n(q.n)?;
        if self.cum_cdf(q.n) == 0.0 {
            return Ok(q.n as f64);
        }
        let mut acc = KahanSum::new();
        for (i, &g) in self.gamma.row(q.n).iter().enumerate() {
            acc.add(g * (-q.lambda * self.cum_cdf(i + 1) * q.t).exp());
        }
        Ok(acc.value())
    }

    /// Expected number of packages picked up by time `t` on a line of `n`.
    pub fn expected_pickups_line(&self, q: &ExpectationQuery) -> Result<f64, ExactError> {
        Ok(q.n as f64 - self.expected_remaining_line(q)?)
    }

    /// Expected number of packages picked up by time `t` on a circle of `n`.
    /// The closed form holds only for `n >= m`; smaller circles are rejected.
    pub fn expected_pickups_circle(&self, q: &ExpectationQuery) -> Result<f64, ExactError> {
        self.check_n(q.n)?;
        let m = self.pmf.max_size();
        if q.n < m {
            return Err(ExactError::CircleTooFew { n: q.n, m });
        }
        let n = q.n;
        let mut acc = KahanSum::new();
        let row = self.gamma_tilde.row(n);
        for (i, &g) in row.iter().enumerate().take(n - 1) {
            acc.add(g * (-q.lambda * self.cum_cdf(i + 1) * q.t).exp());
        }
        acc.add(row[n - 1] * (-q.lambda * n as f64 * q.t).exp());
        Ok(n as f64 - acc.value())
    }

    /// Central-difference residual of the line recursion's differential
    /// equation at `(t, n, λ)`:
    ///
    /// ```text
    /// | dR/dt - λ·( -S_n · R(t,n) + 2 Σ_{i=1}^{n-1} cdf(n-i) · R(t,i) ) |
    /// ```
    ///
    /// A validation diagnostic; expected O(h²) plus rounding.
    pub fn ode_residual(&self, q: &ExpectationQuery, h: f64) -> Result<f64, ExactError> {
        if !(h > 0.0 && q.t > h) {
            return Err(ExactError::BadResidualWindow { t: q.t, h });
        }
        self.check_n(q.n)?;
        let at = |t: f64, n: usize| {
            self.expected_remaining_line(&ExpectationQuery { t, n, lambda: q.lambda })
        };
        let fwd = at(q.t + h, q.n)?;
        let bwd = at(q.t - h, q.n)?;
        let ddt = (fwd - bwd) / (2.0 * h);
        let mut rhs = KahanSum::new();
        rhs.add(-self.cum_cdf(q.n) * at(q.t, q.n)?);
        for i in 1..q.n {
            let f = self.pmf.cdf(q.n - i);
            if f > 0.0 {
                rhs.add(2.0 * f * at(q.t, i)?);
            }
        }
        Ok((ddt - q.lambda * rhs.value()).abs())
    }
}
