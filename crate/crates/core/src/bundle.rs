//! Bundle-size distribution `F` on `{1, …, m}` and its derived analytic
//! quantities: CDF, complementary CDF, mean, and the polynomial
//! `phi(y) = Σ_{i=1}^{m-1} ccdf(i)/i · y^i` with its first two derivatives.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PmfError {
    #[error("bundle-size weights must contain at least one positive entry")]
    AllZero,
    #[error("bundle-size weight at index {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("bundle-size weight at index {index} is not finite")]
    NonFinite { index: usize },
    #[error("invalid pmf specification `{0}` (expected det:m, uniform:a..b, tpois:mean,max or list:p1,p2,...)")]
    BadSpec(String),
}

/// Probability mass function of the requested bundle size, supported on
/// `{1, …, m}` with `pmf(m) > 0`.
///
/// Immutable after construction; cheap to clone and safe to share.
#[derive(Debug, Clone, PartialEq)]
pub struct BundlePmf {
    /// probs[k-1] = P(B = k), normalized, trailing zeros trimmed.
    probs: Vec<f64>,
    /// cum[k-1] = F(k) = P(B <= k).
    cum: Vec<f64>,
}

impl BundlePmf {
    /// Normalizes `weights` (weight for size `k` at index `k-1`) into a pmf.
    /// Trailing zero weights are trimmed so that `pmf(m) > 0`; the exact
    /// solution's boundary conditions key off `cdf(i) == 0`, which must mean
    /// "below the minimum support".
    pub fn from_weights(weights: &[f64]) -> Result<Self, PmfError> {
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(PmfError::NonFinite { index: i });
            }
            if w < 0.0 {
                return Err(PmfError::NegativeWeight { index: i, value: w });
            }
        }
        let last_pos = weights
            .iter()
            .rposition(|&w| w > 0.0)
            .ok_or(PmfError::AllZero)?;
        let total: f64 = weights[..=last_pos].iter().sum();
        let probs: Vec<f64> = weights[..=last_pos].iter().map(|&w| w / total).collect();
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cum.push(acc);
        }
        Ok(Self { probs, cum })
    }

    /// `P(B = m) = 1`: every driver requests exactly `m` packages.
    pub fn deterministic(m: usize) -> Self {
        assert!(m >= 1, "bundle size must be at least 1");
        let mut w = vec![0.0; m];
        w[m - 1] = 1.0;
        Self::from_weights(&w).expect("deterministic weights are valid")
    }

    /// Uniform on `{a, …, b}`.
    pub fn uniform_range(a: usize, b: usize) -> Result<Self, PmfError> {
        if a < 1 || b < a {
            return Err(PmfError::BadSpec(format!("uniform:{a}..{b}")));
        }
        let mut w = vec![0.0; b];
        for entry in w.iter_mut().take(b).skip(a - 1) {
            *entry = 1.0;
        }
        Self::from_weights(&w)
    }

    /// Poisson(`mean`) conditioned on `{1, …, max}`.
    pub fn truncated_poisson(mean: f64, max: usize) -> Result<Self, PmfError> {
        if mean.is_nan() || mean <= 0.0 || max < 1 {
            return Err(PmfError::BadSpec(format!("tpois:{mean},{max}")));
        }
        // Unnormalized Poisson weights mean^k / k!, built iteratively; the
        // common e^{-mean} factor cancels in normalization.
        let mut w = Vec::with_capacity(max);
        let mut p = mean; // k = 1
        w.push(p);
        for k in 2..=max {
            p *= mean / k as f64;
            w.push(p);
        }
        Self::from_weights(&w)
    }

    /// Parses the pmf mini-language used by configs and the CLI:
    /// `det:m`, `uniform:a..b`, `tpois:mean,max`, `list:p1,p2,...`,
    /// plus the named family `truncated-poisson(mean, max)`.
    pub fn parse_spec(spec: &str) -> Result<Self, PmfError> {
        let bad = || PmfError::BadSpec(spec.to_string());
        let s = spec.trim();
        if let Some(rest) = s.strip_prefix("det:") {
            let m: usize = rest.trim().parse().map_err(|_| bad())?;
            if m < 1 {
                return Err(bad());
            }
            return Ok(Self::deterministic(m));
        }
        if let Some(rest) = s.strip_prefix("uniform:") {
            let (a, b) = rest.split_once("..").ok_or_else(bad)?;
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            return Self::uniform_range(a, b);
        }
        if let Some(rest) = s.strip_prefix("tpois:") {
            let (mean, max) = rest.split_once(',').ok_or_else(bad)?;
            let mean: f64 = mean.trim().parse().map_err(|_| bad())?;
            let max: usize = max.trim().parse().map_err(|_| bad())?;
            return Self::truncated_poisson(mean, max);
        }
        if let Some(rest) = s.strip_prefix("list:") {
            let weights: Result<Vec<f64>, _> =
                rest.split(',').map(|p| p.trim().parse::<f64>()).collect();
            let weights = weights.map_err(|_| bad())?;
            return Self::from_weights(&weights);
        }
        if let Some(rest) = s.strip_prefix("truncated-poisson(") {
            let inner = rest.strip_suffix(')').ok_or_else(bad)?;
            let (mean, max) = inner.split_once(',').ok_or_else(bad)?;
            let mean: f64 = mean.trim().parse().map_err(|_| bad())?;
            let max: usize = max.trim().parse().map_err(|_| bad())?;
            return Self::truncated_poisson(mean, max);
        }
        Err(bad())
    }

    /// Maximum of the support, `m`.
    pub fn max_size(&self) -> usize {
        self.probs.len()
    }

    /// `P(B = k)`; zero outside `[1, m]`.
    pub fn pmf(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.probs.len() {
            self.probs[k - 1]
        } else {
            0.0
        }
    }

    /// `F(k) = P(B <= k)`; 0 for `k = 0`, 1 for `k >= m`.
    pub fn cdf(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else if k >= self.cum.len() {
            1.0
        } else {
            self.cum[k - 1]
        }
    }

    /// `1 - F(k)`, computed as an upper-tail sum to avoid cancellation.
    pub fn ccdf(&self, k: usize) -> f64 {
        if k >= self.probs.len() {
            0.0
        } else {
            self.probs[k..].iter().sum()
        }
    }

    /// `E[B]`.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (i + 1) as f64 * p)
            .sum()
    }

    /// `phi(y) = Σ_{i=1}^{m-1} ccdf(i)/i · y^i`, evaluated in Horner form.
    pub fn phi(&self, y: f64) -> f64 {
        let m = self.max_size();
        let mut acc = 0.0;
        for i in (1..m).rev() {
            acc = (acc + self.ccdf(i) / i as f64) * y;
        }
        acc
    }

    /// `phi'(y) = Σ_{i=1}^{m-1} ccdf(i) · y^{i-1}`; note `phi'(1) = mean - 1`.
    pub fn phi_prime(&self, y: f64) -> f64 {
        let m = self.max_size();
        let mut acc = 0.0;
        for i in (1..m).rev() {
            acc = acc * y + self.ccdf(i);
        }
        acc
    }

    /// `phi''(y) = Σ_{i=2}^{m-1} ccdf(i)(i-1) · y^{i-2}`.
    pub fn phi_second(&self, y: f64) -> f64 {
        let m = self.max_size();
        let mut acc = 0.0;
        for i in (2..m).rev() {
            acc = acc * y + self.ccdf(i) * (i - 1) as f64;
        }
        acc
    }

    /// Draws a bundle size by inverse-CDF lookup (m is small).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        for (i, &c) in self.cum.iter().enumerate() {
            if u < c {
                return i + 1;
            }
        }
        self.probs.len()
    }

    /// Stable hash of the probability vector, for table caching.
    pub fn key(&self) -> u64 {
        use crate::numeric::splitmix64;
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        for &p in &self.probs {
            h = splitmix64(h ^ p.to_bits());
        }
        h
    }
}
