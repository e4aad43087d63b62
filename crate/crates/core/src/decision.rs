//! Bayesian two-action decisions.
//!
//! With two hypotheses and two actions, a single loss ratio `ℓ_I / ℓ_II`
//! determines the optimal action: deciding `a1` under `H0` (type-I error)
//! costs `ℓ_I`, deciding `a0` under `H1` (type-II error) costs `ℓ_II`. The
//! expected loss of `a1` is `ℓ_I·P(Θ0|y)` and of `a0` is `ℓ_II·P(Θ1|y)`, so
//! `a1` is optimal iff the posterior odds `P(Θ1|y)/P(Θ0|y)` exceed the ratio.
//!
//! This rule treats losses as constant within each hypothesis region. When
//! they vary, [`expected_loss_decision`] integrates the full loss function
//! against the posterior instead.
//!
//! An interval-valued ratio `[lo, hi]` yields a three-way rule:
//!
//! | odds            | decision        |
//! |-----------------|-----------------|
//! | `o ≤ lo`        | `a0`            |
//! | `lo < o ≤ hi`   | indeterminate   |
//! | `o > hi`        | `a1`            |
//!
//! A degenerate interval `lo = hi` reduces to the scalar rule, where a tie
//! goes to `a0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypotheses::{derive_hypotheses, HypothesisPair};
use crate::inference::PosteriorModel;
use crate::loss::{Action, LossSpec};
use crate::partition::{partition, PartitionOptions};
use crate::quadrature::{breaks_within, integrate_pieces};

pub const EXPECTED_LOSS_TOL: f64 = 1e-8;
pub const EXPECTED_LOSS_TIE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RatioRepr", into = "RatioRepr")]
pub struct LossRatio {
    lo: f64,
    hi: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RatioRepr {
    Scalar(f64),
    Interval([f64; 2]),
}

impl TryFrom<RatioRepr> for LossRatio {
    type Error = Error;

    fn try_from(r: RatioRepr) -> Result<Self> {
        match r {
            RatioRepr::Scalar(v) => LossRatio::scalar(v),
            RatioRepr::Interval([lo, hi]) => LossRatio::interval(lo, hi),
        }
    }
}

impl From<LossRatio> for RatioRepr {
    fn from(r: LossRatio) -> Self {
        if r.is_scalar() {
            RatioRepr::Scalar(r.lo)
        } else {
            RatioRepr::Interval([r.lo, r.hi])
        }
    }
}

impl LossRatio {
    pub fn scalar(value: f64) -> Result<Self> {
        LossRatio::interval(value, value)
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::parameter(format!(
                "loss ratio bounds must be finite and positive, got [{lo}, {hi}]"
            )));
        }
        if hi < lo {
            return Err(Error::parameter(format!(
                "loss ratio upper bound {hi} is below lower bound {lo}"
            )));
        }
        Ok(LossRatio { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_scalar(&self) -> bool {
        self.lo == self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    A0,
    A1,
    Indeterminate,
}

impl Decision {
    pub fn label(&self) -> &'static str {
        match self {
            Decision::A0 => "a0",
            Decision::A1 => "a1",
            Decision::Indeterminate => "indeterminate",
        }
    }
}

impl From<Action> for Decision {
    fn from(a: Action) -> Self {
        match a {
            Action::A0 => Decision::A0,
            Action::A1 => Decision::A1,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecisionOutcome {
    pub decision: Decision,
    pub posterior_h0: f64,
    pub posterior_h1: f64,
    /// `P(Θ1|y) / P(Θ0|y)`; infinite when `P(Θ0|y) = 0`.
    pub posterior_odds: f64,
    /// Loss-ratio bounds for the hypothesis rule; expected losses of `a0`
    /// and `a1` for the expected-loss rule.
    pub threshold_lo: f64,
    pub threshold_hi: f64,
}

/// Three-way rule on posterior odds; see the module docs.
pub fn decide_from_odds(odds: f64, ratio: &LossRatio) -> Decision {
    if odds > ratio.hi {
        Decision::A1
    } else if odds <= ratio.lo {
        Decision::A0
    } else {
        Decision::Indeterminate
    }
}

fn odds(p0: f64, p1: f64) -> f64 {
    if p0 == 0.0 {
        f64::INFINITY
    } else {
        p1 / p0
    }
}

/// Renormalized posterior probabilities of the two hypotheses.
pub fn hypothesis_probabilities(
    post: &PosteriorModel,
    pair: &HypothesisPair,
    restricted_space: bool,
) -> Result<(f64, f64)> {
    if !restricted_space && !pair.covers_space() {
        return Err(Error::NotCovering {
            uncovered: pair.uncovered_measure(),
        });
    }
    let p0 = post.region_prob(&pair.h0);
    let p1 = post.region_prob(&pair.h1);
    let total = p0 + p1;
    if !(total > 0.0) {
        return Err(Error::DegenerateEvidence);
    }
    Ok((p0 / total, p1 / total))
}

/// Hypothesis-based decision with a scalar or interval loss ratio.
///
/// The pair must cover the parameter space unless `restricted_space` is set,
/// which accepts that effects outside `Θ0 ∪ Θ1` are ruled out.
pub fn bayes_two_action_decision(
    post: &PosteriorModel,
    pair: &HypothesisPair,
    ratio: &LossRatio,
    restricted_space: bool,
) -> Result<DecisionOutcome> {
    let (p0, p1) = hypothesis_probabilities(post, pair, restricted_space)?;
    let o = odds(p0, p1);
    Ok(DecisionOutcome {
        decision: decide_from_odds(o, ratio),
        posterior_h0: p0,
        posterior_h1: p1,
        posterior_odds: o,
        threshold_lo: ratio.lo,
        threshold_hi: ratio.hi,
    })
}

/// Posterior expected loss of both actions, by quadrature over the part of
/// the parameter space where the posterior carries mass.
pub fn expected_losses(post: &PosteriorModel, spec: &LossSpec) -> Result<(f64, f64)> {
    let (slo, shi) = post.effective_support();
    let lo = spec.space.lo.max(slo);
    let hi = spec.space.hi.min(shi);
    if !(hi > lo) {
        return Err(Error::validation(
            "posterior puts no mass on the loss's parameter space",
        ));
    }
    let breaks = breaks_within(lo, hi, spec.breakpoints().into_iter().chain(post.quadrature_breaks()));
    let mass = integrate_pieces(|t| post.density(t), &breaks, EXPECTED_LOSS_TOL);
    if !(mass.value > 0.0) {
        return Err(Error::DegenerateEvidence);
    }
    let mut out = [0.0; 2];
    for (slot, action) in out.iter_mut().zip([Action::A0, Action::A1]) {
        let curve_at = |t: f64| spec.evaluate(t.clamp(spec.space.lo, spec.space.hi), action);
        curve_at(lo)?;
        let r = integrate_pieces(
            |t| post.density(t) * curve_at(t).unwrap_or(f64::NAN),
            &breaks,
            EXPECTED_LOSS_TOL,
        );
        if !r.value.is_finite() {
            return Err(Error::validation(format!("expected loss of {action} is not finite")));
        }
        if let Some(w) = r.warning().or(mass.warning()) {
            return Err(Error::Parameter(format!("expected loss of {action}: {w}")));
        }
        *slot = r.value / mass.value;
    }
    Ok((out[0], out[1]))
}

/// Chooses the action with the smaller posterior expected loss; ties within
/// `1e-10` go to `a0`.
pub fn expected_loss_decision(post: &PosteriorModel, spec: &LossSpec) -> Result<DecisionOutcome> {
    let part = partition(spec, &PartitionOptions::default())?;
    let pair = derive_hypotheses(&part, spec.space);
    expected_loss_decision_with(post, spec, &pair)
}

/// As [`expected_loss_decision`], reporting hypothesis probabilities for a
/// caller-supplied pair instead of re-partitioning the space.
pub fn expected_loss_decision_with(
    post: &PosteriorModel,
    spec: &LossSpec,
    pair: &HypothesisPair,
) -> Result<DecisionOutcome> {
    let (e0, e1) = expected_losses(post, spec)?;
    let decision = if e1 < e0 - EXPECTED_LOSS_TIE {
        Decision::A1
    } else {
        Decision::A0
    };
    let p0 = post.region_prob(&pair.h0);
    let p1 = post.region_prob(&pair.h1);
    let total = p0 + p1;
    let (p0, p1) = if total > 0.0 {
        (p0 / total, p1 / total)
    } else {
        (p0, p1)
    };
    Ok(DecisionOutcome {
        decision,
        posterior_h0: p0,
        posterior_h1: p1,
        posterior_odds: odds(p0, p1),
        threshold_lo: e0,
        threshold_hi: e1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub odds: f64,
    pub at_lo: Decision,
    pub at_hi: Decision,
    pub interval: Decision,
    pub consistent: bool,
}

/// Compares the interval rule with the scalar rule at both ends of the ratio:
/// the interval decision must equal their common verdict when they agree and
/// be indeterminate exactly when they disagree.
pub fn consistency_for_odds(odds: f64, ratio: &LossRatio) -> ConsistencyReport {
    let lo = LossRatio {
        lo: ratio.lo,
        hi: ratio.lo,
    };
    let hi = LossRatio {
        lo: ratio.hi,
        hi: ratio.hi,
    };
    let at_lo = decide_from_odds(odds, &lo);
    let at_hi = decide_from_odds(odds, &hi);
    let interval = decide_from_odds(odds, ratio);
    let consistent = if at_lo == at_hi {
        interval == at_lo
    } else {
        interval == Decision::Indeterminate
    };
    ConsistencyReport {
        odds,
        at_lo,
        at_hi,
        interval,
        consistent,
    }
}

pub fn three_way_consistency(
    post: &PosteriorModel,
    pair: &HypothesisPair,
    ratio: &LossRatio,
    restricted_space: bool,
) -> Result<ConsistencyReport> {
    let (p0, p1) = hypothesis_probabilities(post, pair, restricted_space)?;
    Ok(consistency_for_odds(odds(p0, p1), ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{LossCurve, ParameterSpace};
    use crate::region::{Interval, RegionSet};

    fn ratio(lo: f64, hi: f64) -> LossRatio {
        LossRatio::interval(lo, hi).unwrap()
    }

    #[test]
    fn odds_rule_examples() {
        assert_eq!(decide_from_odds(1.0, &LossRatio::scalar(1.0).unwrap()), Decision::A0);
        assert_eq!(decide_from_odds(3.0, &ratio(1.0, 2.0)), Decision::A1);
        assert_eq!(decide_from_odds(1.5, &ratio(1.0, 2.0)), Decision::Indeterminate);
        assert_eq!(decide_from_odds(f64::INFINITY, &ratio(1.0, 2.0)), Decision::A1);
        assert_eq!(decide_from_odds(0.0, &ratio(1.0, 2.0)), Decision::A0);
    }

    #[test]
    fn consistency_examples() {
        let r = consistency_for_odds(3.0, &ratio(1.0, 2.0));
        assert_eq!(
            (r.at_lo, r.at_hi, r.interval),
            (Decision::A1, Decision::A1, Decision::A1)
        );
        assert!(r.consistent);
        let r = consistency_for_odds(1.5, &ratio(1.0, 2.0));
        assert_eq!(
            (r.at_lo, r.at_hi, r.interval),
            (Decision::A1, Decision::A0, Decision::Indeterminate)
        );
        assert!(r.consistent);
        for o in [0.5, 2.0, 2.5, 10.0] {
            let degenerate = ratio(2.0, 2.0);
            assert_eq!(
                decide_from_odds(o, &degenerate),
                decide_from_odds(o, &LossRatio::scalar(2.0).unwrap())
            );
            assert!(consistency_for_odds(o, &degenerate).consistent);
        }
        // Boundary odds stay consistent at both ends.
        assert!(consistency_for_odds(1.0, &ratio(1.0, 2.0)).consistent);
        assert!(consistency_for_odds(2.0, &ratio(1.0, 2.0)).consistent);
    }

    #[test]
    fn invalid_ratios() {
        assert!(LossRatio::scalar(0.0).is_err());
        assert!(LossRatio::interval(2.0, 1.0).is_err());
        assert!(LossRatio::scalar(f64::INFINITY).is_err());
    }

    fn coin_pair() -> HypothesisPair {
        HypothesisPair::new(
            RegionSet::single(Interval::closed(-0.106, 0.106)),
            RegionSet::new([
                Interval::new(-0.5, -0.106, false, true),
                Interval::new(0.106, 0.5, true, false),
            ])
            .unwrap(),
            ParameterSpace::coin(),
        )
        .unwrap()
    }

    #[test]
    fn coin_decisions() {
        let one = LossRatio::scalar(1.0).unwrap();
        let heads = PosteriorModel::Beta { alpha: 21.0, beta: 1.0 };
        let out = bayes_two_action_decision(&heads, &coin_pair(), &one, false).unwrap();
        assert_eq!(out.decision, Decision::A1);
        assert!((out.posterior_h0 + out.posterior_h1 - 1.0).abs() < 1e-12);

        let balanced = PosteriorModel::Beta { alpha: 6.0, beta: 6.0 };
        let out = bayes_two_action_decision(&balanced, &coin_pair(), &one, false).unwrap();
        assert_eq!(out.decision, Decision::A0);
        let wide = bayes_two_action_decision(&balanced, &coin_pair(), &ratio(0.01, 100.0), false).unwrap();
        assert_eq!(wide.decision, Decision::Indeterminate);
    }

    #[test]
    fn partial_pairs_need_restricted_flag() {
        let pair = HypothesisPair::new(
            RegionSet::points(&[0.0]).unwrap(),
            RegionSet::points(&[0.3]).unwrap(),
            ParameterSpace::coin(),
        )
        .unwrap();
        let post = PosteriorModel::Beta { alpha: 3.0, beta: 3.0 };
        let one = LossRatio::scalar(1.0).unwrap();
        assert!(matches!(
            bayes_two_action_decision(&post, &pair, &one, false),
            Err(Error::NotCovering { .. })
        ));
        assert_eq!(
            bayes_two_action_decision(&post, &pair, &one, true),
            Err(Error::DegenerateEvidence)
        );
    }

    #[test]
    fn expected_loss_follows_pointwise_preference_when_concentrated() {
        let spec = LossSpec::coin_demo();
        let at_zero = PosteriorModel::Beta { alpha: 1e6, beta: 1e6 };
        assert_eq!(expected_loss_decision(&at_zero, &spec).unwrap().decision, Decision::A0);
        // π = 0.8, b = 0.3
        let at_03 = PosteriorModel::Beta { alpha: 8e5, beta: 2e5 };
        let out = expected_loss_decision(&at_03, &spec).unwrap();
        assert_eq!(out.decision, Decision::A1);
        // Expected losses approach the pointwise losses at b = 0.3.
        assert!((out.threshold_lo - 0.3).abs() < 1e-3);
        assert!((out.threshold_hi - crate::loss::COIN_DEMO_K * 0.2).abs() < 1e-3);

        let c = LossCurve::quadratic(1.0, 0.0, 0.1);
        let equal = LossSpec::new(ParameterSpace::coin(), c.clone(), c);
        for post in [at_zero, at_03, PosteriorModel::Beta { alpha: 2.0, beta: 5.0 }] {
            assert_eq!(expected_loss_decision(&post, &equal).unwrap().decision, Decision::A0);
        }
    }

    #[test]
    fn expected_loss_under_uniform_posterior() {
        // E|b| = 0.25 and E[k(0.5 − |b|)] = 0.25k under Beta(1, 1).
        let spec = LossSpec::coin_demo();
        let uniform = PosteriorModel::Beta { alpha: 1.0, beta: 1.0 };
        let (e0, e1) = expected_losses(&uniform, &spec).unwrap();
        assert!((e0 - 0.25).abs() < 1e-8);
        assert!((e1 - 0.25 * crate::loss::COIN_DEMO_K).abs() < 1e-8);
    }
}
