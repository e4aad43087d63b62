//! Adaptive Simpson integration.

use serde::Serialize;

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const MAX_DEPTH: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    /// Some subinterval hit the depth limit before meeting its error target.
    pub depth_exhausted: bool,
}

impl QuadResult {
    pub fn warning(&self) -> Option<&'static str> {
        self.depth_exhausted
            .then_some("adaptive Simpson hit its depth limit; result may be inaccurate")
    }
}

struct Simpson<'a, F> {
    f: &'a F,
    exhausted: bool,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(&mut self, a: f64, fa: f64, m: f64, fm: f64, b: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        if depth >= MAX_DEPTH || lm <= a || rm >= b {
            self.exhausted = true;
            return left + right + delta / 15.0;
        }
        self.recurse(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1)
            + self.recurse(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1)
    }
}

/// `∫_lo^hi f` to absolute error `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> QuadResult {
    integrate_pieces(f, &[lo, hi], tol)
}

/// Integrates over consecutive pieces `[breaks[i], breaks[i+1]]`, sharing the
/// tolerance between them. Breaks at kinks or narrow peaks keep the first
/// Simpson step from stepping over them.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> QuadResult {
    let mut state = Simpson {
        f: &f,
        exhausted: false,
    };
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    let piece_tol = tol / pieces;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += state.recurse(a, fa, m, fm, b, fb, whole, piece_tol, 0);
    }
    QuadResult {
        value: total,
        depth_exhausted: state.exhausted,
    }
}

/// Sorted, de-duplicated break list restricted to `[lo, hi]` with both ends.
pub(crate) fn breaks_within(lo: f64, hi: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = extra
        .into_iter()
        .filter(|t| t.is_finite() && *t > lo && *t < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_beta;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_and_square() {
        assert_abs_diff_eq!(integrate(|_| 1.0, 0.0, 1.0, 1e-10).value, 1.0, epsilon = 1e-14);
        let r = integrate(|t| t * t, 0.0, 1.0, 1e-10);
        assert_abs_diff_eq!(r.value, 1.0 / 3.0, epsilon = 1e-10);
        assert!(!r.depth_exhausted);
    }

    #[test]
    fn beta_density_normalizes() {
        let lnb = ln_beta(8.0, 4.0);
        let dens = |x: f64| (7.0 * x.ln() + 3.0 * (1.0 - x).ln() - lnb).exp();
        let r = integrate(|x| if x <= 0.0 || x >= 1.0 { 0.0 } else { dens(x) }, 0.0, 1.0, 1e-10);
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-8);
        // Cross-check a sub-interval against a CDF difference.
        let part = integrate(dens, 0.5, 0.75, 1e-12).value;
        let cdf = |x: f64| crate::special::beta_reg(8.0, 4.0, x);
        assert_abs_diff_eq!(part, cdf(0.75) - cdf(0.5), epsilon = 1e-10);
    }

    #[test]
    fn kink_with_breaks() {
        let r = integrate_pieces(|t: f64| t.abs(), &[-1.0, 0.0, 1.0], 1e-12);
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-14);
        let r = integrate(|t: f64| t.abs(), -1.0, 0.7, 1e-10);
        assert_abs_diff_eq!(r.value, 0.5 + 0.245, epsilon = 1e-10);
    }

    #[test]
    fn depth_exhaustion_is_flagged() {
        // Discontinuity off the dyadic grid never converges to 1e-30.
        let r = integrate(|t| if t < 1.0 / 3.0 { 0.0 } else { 1.0 }, 0.0, 1.0, 1e-30);
        assert!(r.depth_exhausted);
        assert!(r.warning().is_some());
        assert_abs_diff_eq!(r.value, 2.0 / 3.0, epsilon = 1e-9);
    }
}
