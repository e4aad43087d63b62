//! Baseline procedures shown next to the decision engine: point-null
//! significance tests, TOST equivalence tests, the ROPE rule and an
//! interval-null Bayes factor.
//!
//! These answer different questions than the decision engine (test
//! decisions, evidence, acceptance of a null value) and their verdicts are
//! reported side by side without reconciliation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypotheses::HypothesisPair;
use crate::inference::{weighted_integral, BinomialModel, NormalKnownVarModel, PosteriorModel, SamplingModel};
use crate::region::RegionSet;
use crate::special::{beta_reg, norm_sf};

pub const BAYES_FACTOR_TOL: f64 = 1e-10;
pub const DEFAULT_BF_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparatorResult {
    pub procedure: &'static str,
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bayes_factor: Option<f64>,
    pub verdict: &'static str,
    /// Significance level, credible mass or evidence threshold.
    pub threshold: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::parameter(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Exact two-sided p-value for `π = 0.5`: twice the smaller tail, clipped at 1.
pub fn binomial_two_sided_p(n: u64, k: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    // P(X ≤ k) = I_{1/2}(n − k, k + 1), P(X ≥ k) = I_{1/2}(k, n − k + 1)
    let lower = if k >= n {
        1.0
    } else {
        beta_reg((n - k) as f64, k as f64 + 1.0, 0.5)
    };
    let upper = if k == 0 {
        1.0
    } else {
        beta_reg(k as f64, (n - k) as f64 + 1.0, 0.5)
    };
    (2.0 * lower.min(upper)).min(1.0)
}

/// Two-sided test of the nil hypothesis (`π = 0.5`, resp. `θ = 0`).
pub fn nhst_point_null(model: &SamplingModel, alpha: f64) -> Result<ComparatorResult> {
    check_alpha(alpha)?;
    model.check()?;
    let (statistic, p) = match model {
        SamplingModel::Binomial(BinomialModel { n, k, .. }) => (*k as f64, binomial_two_sided_p(*n, *k)),
        SamplingModel::Normal(m) => {
            let z = m.ybar / m.standard_error();
            (z, (2.0 * norm_sf(z.abs())).min(1.0))
        }
    };
    Ok(ComparatorResult {
        procedure: "nhst",
        statistic,
        p_value: Some(p),
        bayes_factor: None,
        verdict: if p < alpha { "reject" } else { "not_reject" },
        threshold: alpha,
    })
}

/// Two one-sided z-tests of `θ ≤ lo` and `θ ≥ hi`; equivalence is concluded
/// when both are rejected at `alpha`. The reported p-value is the larger one
/// and the statistic the smaller of the two z-scores.
pub fn tost_equivalence(model: &NormalKnownVarModel, bounds: (f64, f64), alpha: f64) -> Result<ComparatorResult> {
    check_alpha(alpha)?;
    model.check()?;
    let (lo, hi) = bounds;
    if !(lo < hi) {
        return Err(Error::parameter(format!("TOST bounds need lo < hi, got ({lo}, {hi})")));
    }
    let se = model.standard_error();
    let z_lower = (model.ybar - lo) / se;
    let z_upper = (hi - model.ybar) / se;
    let p_lower = norm_sf(z_lower);
    let p_upper = norm_sf(z_upper);
    let p = p_lower.max(p_upper);
    Ok(ComparatorResult {
        procedure: "tost",
        statistic: z_lower.min(z_upper),
        p_value: Some(p),
        bayes_factor: None,
        verdict: if p_lower < alpha && p_upper < alpha {
            "equivalent"
        } else {
            "not_equivalent"
        },
        threshold: alpha,
    })
}

/// The single interval a ROPE rule compares against.
pub fn rope_bounds(rope: &RegionSet) -> Result<(f64, f64)> {
    match rope.intervals() {
        [] => Err(Error::parameter("ROPE must not be empty")),
        [iv] => Ok((iv.lo, iv.hi)),
        _ => Err(Error::parameter(format!(
            "ROPE must be a single interval around the null value, got {rope}"
        ))),
    }
}

/// Central credible interval against the ROPE: inside → `accept_a0`,
/// disjoint → `accept_a1`, otherwise `withhold`. The statistic is the
/// posterior mass inside the ROPE.
pub fn rope_decision(post: &PosteriorModel, rope: &RegionSet, mass: f64) -> Result<ComparatorResult> {
    let (rlo, rhi) = rope_bounds(rope)?;
    let (lo, hi) = post.credible_interval(mass)?;
    let verdict = if lo >= rlo && hi <= rhi {
        "accept_a0"
    } else if hi < rlo || lo > rhi {
        "accept_a1"
    } else {
        "withhold"
    };
    Ok(ComparatorResult {
        procedure: "rope",
        statistic: post.region_prob(rope),
        p_value: None,
        bayes_factor: None,
        verdict,
        threshold: mass,
    })
}

/// `BF₁₀ = m₁(y) / m₀(y)` with `mᵢ(y) = ∫_{Θᵢ} f(y|θ) p(θ) dθ / P(Θᵢ)`,
/// i.e. the prior truncated to each hypothesis. Both integrals are computed
/// by adaptive quadrature with the same break points, so without data the
/// factor is exactly 1.
pub fn bayes_factor_10(model: &SamplingModel, pair: &HypothesisPair) -> Result<f64> {
    model.check()?;
    let prior = model.prior();
    let marginal = |set: &RegionSet, name: &str| -> Result<f64> {
        let mut evidence = 0.0;
        let mut prior_mass = 0.0;
        for iv in set.intervals() {
            evidence += relative_integral(&prior, Some(model), iv.lo, iv.hi);
            prior_mass += relative_integral(&prior, None, iv.lo, iv.hi);
        }
        if !(prior_mass > 0.0) {
            return Err(Error::validation(format!("{name} = {set} has zero prior mass")));
        }
        Ok(evidence / prior_mass)
    };
    let m0 = marginal(&pair.h0, "H0")?;
    let m1 = marginal(&pair.h1, "H1")?;
    if m0 == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(m1 / m0)
}

/// Prior-weighted integral to relative accuracy [`BAYES_FACTOR_TOL`]: a
/// first pass sizes the integral, later passes tighten the absolute target.
fn relative_integral(prior: &PosteriorModel, data: Option<&SamplingModel>, lo: f64, hi: f64) -> f64 {
    let mut tol = BAYES_FACTOR_TOL;
    let mut value = weighted_integral(prior, data, |_| 1.0, lo, hi, tol).value;
    for _ in 0..4 {
        let target = (value.abs() * BAYES_FACTOR_TOL).max(f64::MIN_POSITIVE);
        if target >= tol {
            break;
        }
        tol = target;
        value = weighted_integral(prior, data, |_| 1.0, lo, hi, tol).value;
    }
    value
}

pub fn interval_bayes_factor(model: &SamplingModel, pair: &HypothesisPair, threshold: f64) -> Result<ComparatorResult> {
    if !(threshold >= 1.0) {
        return Err(Error::parameter(format!(
            "Bayes factor threshold must be ≥ 1, got {threshold}"
        )));
    }
    let bf = bayes_factor_10(model, pair)?;
    let verdict = if bf > threshold {
        "favors_h1"
    } else if bf < threshold.recip() {
        "favors_h0"
    } else {
        "inconclusive"
    };
    Ok(ComparatorResult {
        procedure: "bayes_factor",
        statistic: bf.ln(),
        p_value: None,
        bayes_factor: Some(bf),
        verdict,
        threshold,
    })
}

/// Posterior odds divided by prior odds of the two hypotheses, from CDFs.
pub fn odds_ratio_bayes_factor(model: &SamplingModel, pair: &HypothesisPair) -> Result<f64> {
    let prior = model.prior();
    let post = model.posterior()?;
    let prior_odds = prior.region_prob(&pair.h1) / prior.region_prob(&pair.h0);
    let post_odds = post.region_prob(&pair.h1) / post.region_prob(&pair.h0);
    Ok(post_odds / prior_odds)
}
