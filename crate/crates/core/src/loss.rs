//! Loss functions `L(θ, a)` over a bounded one-dimensional effect space.
//!
//! Three curve families are supported: piecewise-linear (a linear trend
//! plus weighted `|θ − t|` kinks), quadratic, and tabulated with linear
//! interpolation. The built-in coin demo is a preset of two piecewise-linear
//! curves whose crossings sit at `b = ±0.106`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of points used when scanning a loss over its space.
pub const DEFAULT_GRID_SIZE: usize = 4096;

/// Crossing point of the coin demo curves.
pub const COIN_DEMO_CROSSING: f64 = 0.106;

/// Relative gap below which two losses count as equal.
pub const TIE_RTOL: f64 = 4.0 * f64::EPSILON;

/// Slope of the coin demo's `a1` curve. Chosen so that `|b| = k·(0.5 − |b|)`
/// holds exactly at `|b| = 0.106`.
pub const COIN_DEMO_K: f64 = COIN_DEMO_CROSSING / (0.5 - COIN_DEMO_CROSSING);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSpace {
    pub lo: f64,
    pub hi: f64,
}

impl ParameterSpace {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let space = ParameterSpace { lo, hi };
        space.check()?;
        Ok(space)
    }

    /// Bias space of the coin example, `b = π − 0.5 ∈ [−0.5, 0.5]`.
    pub fn coin() -> Self {
        ParameterSpace { lo: -0.5, hi: 0.5 }
    }

    pub fn check(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::validation("parameter space bounds must be finite"));
        }
        if self.lo >= self.hi {
            return Err(Error::validation(format!(
                "parameter space needs lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn zero_in_space(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn check_contains(&self, theta: f64) -> Result<()> {
        if self.contains(theta) {
            Ok(())
        } else {
            Err(Error::Domain {
                theta,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// `n` equally spaced points with both endpoints hit exactly.
    pub fn uniform_grid(&self, n: usize) -> Vec<f64> {
        uniform_grid(self.lo, self.hi, n)
    }
}

pub(crate) fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    A0,
    A1,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::A0 => f.write_str("a0"),
            Action::A1 => f.write_str("a1"),
        }
    }
}

/// Labels for the two actions. `a0` is the action appropriate when the
/// effect is absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionPair {
    pub a0_label: String,
    pub a1_label: String,
}

impl ActionPair {
    pub fn new(a0_label: impl Into<String>, a1_label: impl Into<String>) -> Result<Self> {
        let pair = ActionPair {
            a0_label: a0_label.into(),
            a1_label: a1_label.into(),
        };
        if pair.a0_label.trim().is_empty() || pair.a1_label.trim().is_empty() {
            return Err(Error::validation("action labels must be non-empty"));
        }
        if pair.a0_label == pair.a1_label {
            return Err(Error::validation("action labels must be distinct"));
        }
        Ok(pair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kink {
    pub at: f64,
    pub weight: f64,
}

/// `intercept + slope·θ + Σ weight·|θ − at|`
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseLinear {
    #[serde(default)]
    pub intercept: f64,
    #[serde(default)]
    pub slope: f64,
    #[serde(default)]
    pub kinks: Vec<Kink>,
}

/// `scale·(θ − center)² + offset`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadratic {
    #[serde(rename = "c")]
    pub scale: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub offset: f64,
}

/// Tabulated loss, linearly interpolated between grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossCurve {
    PiecewiseLinear(PiecewiseLinear),
    Quadratic(Quadratic),
    Table(Table),
}

impl LossCurve {
    pub fn constant(value: f64) -> Self {
        LossCurve::PiecewiseLinear(PiecewiseLinear {
            intercept: value,
            ..Default::default()
        })
    }

    pub fn quadratic(scale: f64, center: f64, offset: f64) -> Self {
        LossCurve::Quadratic(Quadratic { scale, center, offset })
    }

    pub fn table(grid: Vec<f64>, values: Vec<f64>) -> Self {
        LossCurve::Table(Table { grid, values })
    }

    fn coefficients_finite(&self) -> bool {
        match self {
            LossCurve::PiecewiseLinear(p) => {
                p.intercept.is_finite()
                    && p.slope.is_finite()
                    && p.kinks.iter().all(|k| k.at.is_finite() && k.weight.is_finite())
            }
            LossCurve::Quadratic(q) => q.scale.is_finite() && q.center.is_finite() && q.offset.is_finite(),
            LossCurve::Table(t) => t.grid.iter().chain(&t.values).all(|v| v.is_finite()),
        }
    }

    /// Structural problems of the curve on `space`, as report messages.
    fn structural_issues(&self, space: &ParameterSpace) -> Vec<String> {
        let mut issues = Vec::new();
        if !self.coefficients_finite() {
            issues.push("non-finite coefficient".to_string());
        }
        if let LossCurve::Table(t) = self {
            if t.grid.len() != t.values.len() {
                issues.push(format!(
                    "table has {} grid points but {} values",
                    t.grid.len(),
                    t.values.len()
                ));
            }
            if t.grid.len() < 2 {
                issues.push("table needs at least 2 grid points".to_string());
            }
            if t.grid.windows(2).any(|w| !(w[0] < w[1])) {
                issues.push("grid not increasing".to_string());
            }
            if let (Some(first), Some(last)) = (t.grid.first(), t.grid.last()) {
                if *first > space.lo || *last < space.hi {
                    issues.push(format!(
                        "table grid [{first}, {last}] does not cover [{}, {}]",
                        space.lo, space.hi
                    ));
                }
            }
        }
        issues
    }

    fn eval_unchecked(&self, theta: f64) -> f64 {
        match self {
            LossCurve::PiecewiseLinear(p) => {
                p.intercept + p.slope * theta + p.kinks.iter().map(|k| k.weight * (theta - k.at).abs()).sum::<f64>()
            }
            LossCurve::Quadratic(q) => {
                let d = theta - q.center;
                q.scale * d * d + q.offset
            }
            LossCurve::Table(t) => {
                // Exact grid hits return the tabulated value untouched.
                match t.grid.binary_search_by(|g| g.total_cmp(&theta)) {
                    Ok(i) => t.values[i],
                    Err(0) => t.values[0],
                    Err(i) if i >= t.grid.len() => t.values[t.grid.len() - 1],
                    Err(i) => {
                        let (x0, x1) = (t.grid[i - 1], t.grid[i]);
                        let (y0, y1) = (t.values[i - 1], t.values[i]);
                        let w = (theta - x0) / (x1 - x0);
                        y0 + w * (y1 - y0)
                    }
                }
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            LossCurve::PiecewiseLinear(p) => p.kinks.iter().map(|k| k.at).collect(),
            LossCurve::Quadratic(_) => Vec::new(),
            LossCurve::Table(t) => t.grid.clone(),
        }
    }

    fn scaled(&self, c: f64) -> Self {
        match self {
            LossCurve::PiecewiseLinear(p) => LossCurve::PiecewiseLinear(PiecewiseLinear {
                intercept: c * p.intercept,
                slope: c * p.slope,
                kinks: p
                    .kinks
                    .iter()
                    .map(|k| Kink {
                        at: k.at,
                        weight: c * k.weight,
                    })
                    .collect(),
            }),
            LossCurve::Quadratic(q) => LossCurve::Quadratic(Quadratic {
                scale: c * q.scale,
                center: q.center,
                offset: c * q.offset,
            }),
            LossCurve::Table(t) => LossCurve::Table(Table {
                grid: t.grid.clone(),
                values: t.values.iter().map(|v| c * v).collect(),
            }),
        }
    }
}

/// A loss function for both actions over a bounded parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub space: ParameterSpace,
    pub a0: LossCurve,
    pub a1: LossCurve,
}

impl LossSpec {
    pub fn new(space: ParameterSpace, a0: LossCurve, a1: LossCurve) -> Self {
        LossSpec { space, a0, a1 }
    }

    /// The coin example: `L(b, a0) = |b|`, `L(b, a1) = k·(0.5 − |b|)` on
    /// `b ∈ [−0.5, 0.5]`, crossing at `b = ±0.106`.
    pub fn coin_demo() -> Self {
        let a0 = LossCurve::PiecewiseLinear(PiecewiseLinear {
            intercept: 0.0,
            slope: 0.0,
            kinks: vec![Kink { at: 0.0, weight: 1.0 }],
        });
        let a1 = LossCurve::PiecewiseLinear(PiecewiseLinear {
            intercept: 0.5 * COIN_DEMO_K,
            slope: 0.0,
            kinks: vec![Kink {
                at: 0.0,
                weight: -COIN_DEMO_K,
            }],
        });
        LossSpec::new(ParameterSpace::coin(), a0, a1)
    }

    pub fn curve(&self, action: Action) -> &LossCurve {
        match action {
            Action::A0 => &self.a0,
            Action::A1 => &self.a1,
        }
    }

    pub fn evaluate(&self, theta: f64, action: Action) -> Result<f64> {
        self.space.check_contains(theta)?;
        let curve = self.curve(action);
        if let Some(issue) = curve.structural_issues(&self.space).into_iter().next() {
            return Err(Error::validation(format!("loss for {action}: {issue}")));
        }
        let value = curve.eval_unchecked(theta);
        if !value.is_finite() {
            return Err(Error::validation(format!("non-finite loss at θ={theta} ({action})")));
        }
        Ok(value)
    }

    /// `Δ(θ) = L(θ, a1) − L(θ, a0)`; negative means `a1` is preferred.
    pub fn loss_difference(&self, theta: f64) -> Result<f64> {
        Ok(self.evaluate(theta, Action::A1)? - self.evaluate(theta, Action::A0)?)
    }

    /// Action preferred at `θ`; ties go to `a0`. Losses within [`TIE_RTOL`]
    /// of each other are tied.
    pub fn preferred_action(&self, theta: f64) -> Result<Action> {
        let l0 = self.evaluate(theta, Action::A0)?;
        let l1 = self.evaluate(theta, Action::A1)?;
        Ok(if l1 < l0 - TIE_RTOL * l0.abs().max(l1.abs()) {
            Action::A1
        } else {
            Action::A0
        })
    }

    /// Kink and table points of both curves that fall inside the space.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .a0
            .breakpoints()
            .into_iter()
            .chain(self.a1.breakpoints())
            .filter(|t| self.space.contains(*t))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// The same loss multiplied by `c` for both actions.
    pub fn scaled(&self, c: f64) -> Self {
        LossSpec::new(self.space, self.a0.scaled(c), self.a1.scaled(c))
    }

    /// Uniform grid of `grid_size` points merged with all breakpoints.
    pub fn scan_grid(&self, grid_size: usize) -> Vec<f64> {
        let mut pts = self.space.uniform_grid(grid_size);
        pts.extend(self.breakpoints());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with_grid(DEFAULT_GRID_SIZE)
    }

    /// Checks every invariant of the spec, sampling the loss on a dense grid
    /// plus all breakpoints. Violations are collected, never raised.
    pub fn validate_with_grid(&self, grid_size: usize) -> ValidationReport {
        let mut report = ValidationReport::default();
        if let Err(e) = self.space.check() {
            report.push(None, None, e.to_string());
            return report;
        }
        let mut structurally_ok = true;
        for action in [Action::A0, Action::A1] {
            for issue in self.curve(action).structural_issues(&self.space) {
                structurally_ok = false;
                report.push(None, Some(action), issue);
            }
        }
        if !structurally_ok {
            return report;
        }
        for theta in self.scan_grid(grid_size) {
            for action in [Action::A0, Action::A1] {
                let value = self.curve(action).eval_unchecked(theta);
                if !value.is_finite() {
                    report.push(Some(theta), Some(action), format!("non-finite loss at θ={theta}"));
                } else if value < 0.0 {
                    report.push(
                        Some(theta),
                        Some(action),
                        format!("negative loss at θ={theta} ({value})"),
                    );
                }
            }
        }
        report
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub theta: Option<f64>,
    pub action: Option<Action>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.action {
            Some(a) => write!(f, "{a}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn push(&mut self, theta: Option<f64>, action: Option<Action>, message: String) {
        self.violations.push(Violation { theta, action, message });
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::validation(v.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quad_spec(c0: f64, c1: f64) -> LossSpec {
        LossSpec::new(
            ParameterSpace::coin(),
            LossCurve::quadratic(c0, 0.0, 0.0),
            LossCurve::quadratic(c1, 0.0, 0.0),
        )
    }

    #[test]
    fn coin_demo_values() {
        let spec = LossSpec::coin_demo();
        assert_eq!(spec.evaluate(0.0, Action::A0).unwrap(), 0.0);
        // k·0.5 with k = 0.106/0.394
        let expected = 0.5 * 0.106 / 0.394;
        assert_abs_diff_eq!(spec.evaluate(0.0, Action::A1).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(spec.evaluate(0.0, Action::A1).unwrap(), 0.13452, epsilon = 5e-6);
    }

    #[test]
    fn coin_demo_difference() {
        let spec = LossSpec::coin_demo();
        assert_abs_diff_eq!(spec.loss_difference(0.0).unwrap(), 0.13452, epsilon = 5e-6);
        assert_abs_diff_eq!(spec.loss_difference(0.106).unwrap(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(spec.loss_difference(-0.106).unwrap(), 0.0, epsilon = 1e-9);
        assert_eq!(spec.preferred_action(0.0).unwrap(), Action::A0);
        assert_eq!(spec.preferred_action(0.3).unwrap(), Action::A1);
        assert_eq!(spec.preferred_action(0.106).unwrap(), Action::A0);
        assert_eq!(spec.preferred_action(-0.106).unwrap(), Action::A0);
    }

    #[test]
    fn quadratic_value() {
        let spec = quad_spec(1.0, 2.0);
        assert_abs_diff_eq!(spec.evaluate(0.2, Action::A0).unwrap(), 0.04, epsilon = 1e-15);
    }

    #[test]
    fn identical_curves_have_zero_difference() {
        let c = LossCurve::quadratic(0.7, 0.1, 0.2);
        let spec = LossSpec::new(ParameterSpace::coin(), c.clone(), c);
        for theta in [-0.5, -0.1, 0.0, 0.33, 0.5] {
            assert_eq!(spec.loss_difference(theta).unwrap(), 0.0);
        }
    }

    #[test]
    fn out_of_space_is_domain_error() {
        let spec = LossSpec::coin_demo();
        match spec.evaluate(0.7, Action::A0) {
            Err(Error::Domain { lo, hi, .. }) => {
                assert_eq!((lo, hi), (-0.5, 0.5));
            }
            other => panic!("expected domain error, got {other:?}"),
        }
        let msg = spec.evaluate(-0.51, Action::A1).unwrap_err().to_string();
        assert!(msg.contains("-0.5") && msg.contains("0.5"), "{msg}");
    }

    #[test]
    fn non_finite_coefficient_is_validation_error() {
        let spec = LossSpec::new(
            ParameterSpace::coin(),
            LossCurve::quadratic(f64::NAN, 0.0, 0.0),
            LossCurve::constant(1.0),
        );
        assert!(matches!(spec.evaluate(0.0, Action::A0), Err(Error::Validation(_))));
        assert!(spec.validate().contains("non-finite coefficient"));
    }

    #[test]
    fn validation_reports() {
        assert!(LossSpec::coin_demo().validate().is_empty());

        let negative = quad_spec(-1.0, 1.0);
        let report = negative.validate();
        assert!(report.contains("negative loss at θ="));
        assert!(report.violations.iter().all(|v| v.action == Some(Action::A0)));

        let unsorted = LossSpec::new(
            ParameterSpace::coin(),
            LossCurve::table(vec![-0.5, 0.2, 0.1, 0.5], vec![1.0, 1.0, 1.0, 1.0]),
            LossCurve::constant(1.0),
        );
        assert!(unsorted.validate().contains("grid not increasing"));
        assert!(matches!(unsorted.evaluate(0.0, Action::A0), Err(Error::Validation(_))));

        let short = LossSpec::new(
            ParameterSpace::coin(),
            LossCurve::table(vec![-0.4, 0.5], vec![1.0, 1.0]),
            LossCurve::constant(1.0),
        );
        assert!(short.validate().contains("does not cover"));
    }

    #[test]
    fn table_interpolates_and_hits_grid_exactly() {
        let grid = vec![-0.5, -0.1, 0.3, 0.5];
        let values = vec![0.1, 0.7, 0.123_456_789_012_345_6, 2.0];
        let spec = LossSpec::new(
            ParameterSpace::coin(),
            LossCurve::table(grid.clone(), values.clone()),
            LossCurve::constant(0.0),
        );
        for (g, v) in grid.iter().zip(&values) {
            assert_eq!(spec.evaluate(*g, Action::A0).unwrap(), *v);
        }
        assert_abs_diff_eq!(spec.evaluate(-0.3, Action::A0).unwrap(), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn action_labels() {
        assert!(ActionPair::new("keep", "switch").is_ok());
        assert!(ActionPair::new("", "switch").is_err());
        assert!(ActionPair::new("same", "same").is_err());
    }

    #[test]
    fn breakpoints_and_grid() {
        let spec = LossSpec::coin_demo();
        assert_eq!(spec.breakpoints(), vec![0.0]);
        let grid = spec.scan_grid(16);
        assert_eq!(grid.first(), Some(&-0.5));
        assert_eq!(grid.last(), Some(&0.5));
        assert!(grid.contains(&0.0));
        assert!(ParameterSpace::coin().zero_in_space());
        assert!(!ParameterSpace::new(0.1, 1.0).unwrap().zero_in_space());
        assert!(ParameterSpace::new(1.0, 1.0).is_err());
    }
}
