//! Small numeric helpers shared across the crate: compensated summation,
//! adaptive Simpson quadrature, and bounded golden-section minimization.

/// Kahan–Babuška compensated accumulator.
///
/// The exact-expectation formulas sum exponential mixtures whose coefficients
/// can be much larger than the result; plain summation loses digits there.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum a slice with compensation.
pub fn kahan_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Result of an adaptive quadrature run.
#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome {
    pub value: f64,
    /// Accumulated Richardson error estimate over all leaf intervals.
    pub error_estimate: f64,
    /// False if some subinterval hit the recursion depth limit before
    /// meeting its local error budget.
    pub converged: bool,
}

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson integration of `f` on `[a, b]` to absolute tolerance `tol`.
///
/// Uses the standard interval-halving scheme with Richardson extrapolation;
/// each leaf contributes `|S2 - S1|/15` to the reported error estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> QuadOutcome {
    if a == b {
        return QuadOutcome { value: 0.0, error_estimate: 0.0, converged: true };
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut out = QuadOutcome { value: 0.0, error_estimate: 0.0, converged: true };
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    out: &mut QuadOutcome,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Interval is converged, or cannot be split further in f64.
    if delta.abs() <= 15.0 * tol || depth == 0 || lm <= a || rm >= b {
        out.value += left + right + delta / 15.0;
        out.error_estimate += delta.abs() / 15.0;
        if delta.abs() > 15.0 * tol {
            out.converged = false;
        }
        return;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

/// Golden-section search for the minimum of `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)`. Assumes `f` is unimodal on the bracket; callers
/// that cannot guarantee this should seed the bracket from a grid scan.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol_x: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    if b < a {
        std::mem::swap(&mut a, &mut b);
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a) > tol_x {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// SplitMix64 finalizer; used to derive independent per-replication seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_is_near_exact() {
        // Simpson is exact for cubics; quartic needs subdivision.
        let out = adaptive_simpson(|x| x * x * x * x, 0.0, 1.0, 1e-12);
        assert!((out.value - 0.2).abs() < 1e-11);
        assert!(out.converged);
    }

    #[test]
    fn simpson_exponential() {
        let out = adaptive_simpson(|x| (2.0 * (x - 1.0)).exp(), 0.0, 1.0, 1e-12);
        let exact = 0.5 * (1.0 - (-2.0f64).exp());
        assert!((out.value - exact).abs() < 1e-11);
    }

    #[test]
    fn simpson_empty_interval() {
        let out = adaptive_simpson(|x| x, 2.0, 2.0, 1e-12);
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        // Near a quadratic minimum the f-comparisons flatten out around
        // sqrt(eps), which bounds the achievable x-accuracy.
        let (x, fx) = golden_min(|x| (x - 1.25) * (x - 1.25) + 3.0, -4.0, 6.0, 1e-10);
        assert!((x - 1.25).abs() < 1e-6, "x = {x}");
        assert!((fx - 3.0).abs() < 1e-12);
    }

    #[test]
    fn kahan_beats_naive_on_adversarial_sum() {
        let mut k = KahanSum::new();
        k.add(1e16);
        for _ in 0..10 {
            k.add(1.0);
        }
        k.add(-1e16);
        assert_eq!(k.value(), 10.0);
    }

    #[test]
    fn splitmix_distinct_streams() {
        let a = splitmix64(0);
        let b = splitmix64(1);
        assert_ne!(a, b);
        assert_ne!(a, 0);
    }
}
