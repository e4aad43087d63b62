//! Conjugate posteriors for the effect parameter.
//!
//! Two sampling models are supported:
//!
//! * binomial with a beta prior on the success probability `π`; the effect is
//!   the bias `b = π − 0.5 ∈ [−0.5, 0.5]`;
//! * normal with known variance and a normal prior on the mean, which is the
//!   effect itself.
//!
//! Normal posteriors live on the whole real line; they are not truncated to
//! the parameter space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{breaks_within, integrate_pieces, QuadResult};
use crate::region::RegionSet;
use crate::special::{beta_pdf, beta_reg, invert_cdf, norm_cdf, norm_pdf, norm_sf, xlogy};

/// Shift from the success probability to the bias scale.
pub const BIAS_SHIFT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialModel {
    pub n: u64,
    pub k: u64,
    pub prior_alpha: f64,
    pub prior_beta: f64,
}

impl BinomialModel {
    pub fn check(&self) -> Result<()> {
        if self.k > self.n {
            return Err(Error::validation(format!(
                "binomial data needs k ≤ n, got k={} n={}",
                self.k, self.n
            )));
        }
        for (name, v) in [("prior_alpha", self.prior_alpha), ("prior_beta", self.prior_beta)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalKnownVarModel {
    pub n: u64,
    pub ybar: f64,
    pub sigma: f64,
    pub prior_mean: f64,
    pub prior_sd: f64,
}

impl NormalKnownVarModel {
    pub fn check(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::validation("normal model needs n ≥ 1"));
        }
        if !self.ybar.is_finite() || !self.prior_mean.is_finite() {
            return Err(Error::validation("ybar and prior_mean must be finite"));
        }
        for (name, v) in [("sigma", self.sigma), ("prior_sd", self.prior_sd)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn standard_error(&self) -> f64 {
        self.sigma / (self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SamplingModel {
    Binomial(BinomialModel),
    Normal(NormalKnownVarModel),
}

impl SamplingModel {
    pub fn check(&self) -> Result<()> {
        match self {
            SamplingModel::Binomial(m) => m.check(),
            SamplingModel::Normal(m) => m.check(),
        }
    }

    pub fn prior(&self) -> PosteriorModel {
        match self {
            SamplingModel::Binomial(m) => PosteriorModel::Beta {
                alpha: m.prior_alpha,
                beta: m.prior_beta,
            },
            SamplingModel::Normal(m) => PosteriorModel::Normal {
                mean: m.prior_mean,
                sd: m.prior_sd,
            },
        }
    }

    pub fn posterior(&self) -> Result<PosteriorModel> {
        match self {
            SamplingModel::Binomial(m) => posterior_update_binomial(m),
            SamplingModel::Normal(m) => posterior_update_normal(m),
        }
    }

    /// Log-likelihood of the data at `effect`, up to an additive constant.
    pub fn log_likelihood(&self, effect: f64) -> f64 {
        match self {
            SamplingModel::Binomial(m) => {
                let p = effect + BIAS_SHIFT;
                if !(0.0..=1.0).contains(&p) {
                    return f64::NEG_INFINITY;
                }
                xlogy(m.k as f64, p) + xlogy((m.n - m.k) as f64, 1.0 - p)
            }
            SamplingModel::Normal(m) => {
                let z = (m.ybar - effect) / m.standard_error();
                -0.5 * z * z
            }
        }
    }

    /// Maximum-likelihood effect and the likelihood's spread around it.
    pub(crate) fn likelihood_peak(&self) -> Option<(f64, f64)> {
        match self {
            SamplingModel::Binomial(m) if m.n == 0 => None,
            SamplingModel::Binomial(m) => {
                let n = m.n as f64;
                let p = m.k as f64 / n;
                let spread = (p * (1.0 - p) / n).sqrt().max(1.0 / (n + 2.0));
                Some((p - BIAS_SHIFT, spread))
            }
            SamplingModel::Normal(m) => Some((m.ybar, m.standard_error())),
        }
    }

    /// Likelihood divided by its maximum, in `[0, 1]`.
    pub fn scaled_likelihood(&self) -> impl Fn(f64) -> f64 + '_ {
        let peak = self
            .likelihood_peak()
            .map(|(t, _)| self.log_likelihood(t))
            .unwrap_or(0.0);
        move |effect| (self.log_likelihood(effect) - peak).exp()
    }

    pub fn n(&self) -> u64 {
        match self {
            SamplingModel::Binomial(m) => m.n,
            SamplingModel::Normal(m) => m.n,
        }
    }
}

/// A beta (on the bias scale) or normal distribution for the effect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PosteriorModel {
    /// `π ~ Beta(alpha, beta)` with effect `b = π − 0.5`.
    Beta {
        alpha: f64,
        beta: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
}

impl PosteriorModel {
    /// Range of effects with positive density.
    pub fn support(&self) -> (f64, f64) {
        match self {
            PosteriorModel::Beta { .. } => (-BIAS_SHIFT, 1.0 - BIAS_SHIFT),
            PosteriorModel::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn cdf(&self, effect: f64) -> f64 {
        match *self {
            PosteriorModel::Beta { alpha, beta } => beta_reg(alpha, beta, effect + BIAS_SHIFT),
            PosteriorModel::Normal { mean, sd } => norm_cdf((effect - mean) / sd),
        }
    }

    /// `1 − CDF`, computed directly so upper tails keep their precision.
    pub fn sf(&self, effect: f64) -> f64 {
        match *self {
            PosteriorModel::Beta { alpha, beta } => beta_reg(beta, alpha, BIAS_SHIFT - effect),
            PosteriorModel::Normal { mean, sd } => norm_sf((effect - mean) / sd),
        }
    }

    /// `P(lo < θ < hi)`, from whichever tail avoids cancellation.
    fn interval_prob(&self, lo: f64, hi: f64) -> f64 {
        let p = if self.cdf(lo) > 0.5 {
            self.sf(lo) - self.sf(hi)
        } else {
            self.cdf(hi) - self.cdf(lo)
        };
        p.max(0.0)
    }

    pub fn density(&self, effect: f64) -> f64 {
        match *self {
            PosteriorModel::Beta { alpha, beta } => beta_pdf(alpha, beta, effect + BIAS_SHIFT),
            PosteriorModel::Normal { mean, sd } => norm_pdf((effect - mean) / sd) / sd,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            PosteriorModel::Beta { alpha, beta } => alpha / (alpha + beta) - BIAS_SHIFT,
            PosteriorModel::Normal { mean, .. } => mean,
        }
    }

    pub fn sd(&self) -> f64 {
        match *self {
            PosteriorModel::Beta { alpha, beta } => {
                let s = alpha + beta;
                (alpha * beta / (s * s * (s + 1.0))).sqrt()
            }
            PosteriorModel::Normal { sd, .. } => sd,
        }
    }

    /// Effect at which the CDF reaches `p`, by bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        let (lo, hi) = match *self {
            PosteriorModel::Beta { .. } => self.support(),
            PosteriorModel::Normal { mean, sd } => (mean - 40.0 * sd, mean + 40.0 * sd),
        };
        invert_cdf(|t| self.cdf(t), p, lo, hi)
    }

    /// Total probability of the intervals; openness is irrelevant for a
    /// continuous distribution.
    pub fn region_prob(&self, set: &RegionSet) -> f64 {
        set.intervals()
            .iter()
            .map(|iv| self.interval_prob(iv.lo, iv.hi))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// Central credible interval holding `mass` of the distribution.
    pub fn credible_interval(&self, mass: f64) -> Result<(f64, f64)> {
        if !(mass > 0.0 && mass < 1.0) {
            return Err(Error::parameter(format!(
                "credible mass must lie in (0, 1), got {mass}"
            )));
        }
        let tail = 0.5 * (1.0 - mass);
        Ok((self.quantile(tail), self.quantile(1.0 - tail)))
    }

    /// Effects at which integrands weighted by this density should be split:
    /// the centre and a ladder of standard deviations around it.
    pub(crate) fn quadrature_breaks(&self) -> Vec<f64> {
        let (m, s) = (self.mean(), self.sd());
        [
            -12.0, -8.0, -6.0, -4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0,
        ]
        .iter()
        .map(|j| m + j * s)
        .collect()
    }

    /// Effect range outside of which the density carries negligible mass.
    pub(crate) fn effective_support(&self) -> (f64, f64) {
        let (lo, hi) = self.support();
        let (m, s) = (self.mean(), self.sd());
        ((m - 40.0 * s).max(lo), (m + 40.0 * s).min(hi))
    }

    pub fn summary(&self) -> PosteriorSummary {
        let ci95 = self.credible_interval(0.95).expect("0.95 is a valid mass");
        PosteriorSummary {
            distribution: *self,
            mean: self.mean(),
            sd: self.sd(),
            ci95_lo: ci95.0,
            ci95_hi: ci95.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PosteriorSummary {
    pub distribution: PosteriorModel,
    pub mean: f64,
    pub sd: f64,
    /// Central (not highest-density) 95% interval on the effect scale.
    pub ci95_lo: f64,
    pub ci95_hi: f64,
}

pub fn posterior_update_binomial(model: &BinomialModel) -> Result<PosteriorModel> {
    model.check()?;
    Ok(PosteriorModel::Beta {
        alpha: model.prior_alpha + model.k as f64,
        beta: model.prior_beta + (model.n - model.k) as f64,
    })
}

pub fn posterior_update_normal(model: &NormalKnownVarModel) -> Result<PosteriorModel> {
    model.check()?;
    let prior_precision = 1.0 / (model.prior_sd * model.prior_sd);
    let data_precision = model.n as f64 / (model.sigma * model.sigma);
    let precision = prior_precision + data_precision;
    let mean = (prior_precision * model.prior_mean + data_precision * model.ybar) / precision;
    Ok(PosteriorModel::Normal {
        mean,
        sd: precision.sqrt().recip(),
    })
}

/// `∫_lo^hi f(θ) · prior(θ) · likelihood(θ)/likelihood_max dθ` by adaptive
/// Simpson, split around the likelihood peak and the prior centre. Without
/// data the likelihood factor is 1.
pub(crate) fn weighted_integral<F: Fn(f64) -> f64>(
    prior: &PosteriorModel,
    data: Option<&SamplingModel>,
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> QuadResult {
    let mut extra = prior.quadrature_breaks();
    if let Some((peak, spread)) = data.and_then(SamplingModel::likelihood_peak) {
        extra.extend(
            [
                -40.0, -20.0, -12.0, -8.0, -6.0, -4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 20.0,
                40.0,
            ]
            .iter()
            .map(|j| peak + j * spread),
        );
    }
    let (plo, phi) = prior.effective_support();
    let lo = lo.max(plo);
    let hi = hi.min(phi);
    if !(hi > lo) {
        return QuadResult {
            value: 0.0,
            depth_exhausted: false,
        };
    }
    let breaks = breaks_within(lo, hi, extra);
    match data {
        Some(model) => {
            let lik = model.scaled_likelihood();
            integrate_pieces(|t| f(t) * prior.density(t) * lik(t), &breaks, tol)
        }
        None => integrate_pieces(|t| f(t) * prior.density(t), &breaks, tol),
    }
}
