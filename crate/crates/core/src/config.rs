//! Config documents (TOML).
//!
//! Parsing is strict: unknown keys anywhere are errors. A document walks the
//! user through the analysis in order: the parameter space, the two actions,
//! the loss information, then optionally hypotheses, a model with prior, a
//! decision rule, comparator procedures and a simulation scenario.
//!
//! ```toml
//! spec_version = 1
//! seed = 20210801
//!
//! [parameter_space]
//! lo = -0.5
//! hi = 0.5
//!
//! [actions]
//! a0 = "treat the coin as fair"
//! a1 = "treat the coin as biased"
//!
//! [loss]
//! kind = "builtin_coin_demo"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::decision::LossRatio;
use crate::error::{Error, Result};
use crate::hypotheses::{derive_hypotheses, HypothesisPair};
use crate::inference::{BinomialModel, NormalKnownVarModel, PosteriorModel, SamplingModel};
use crate::loss::{ActionPair, LossCurve, LossSpec, ParameterSpace, PiecewiseLinear, Quadratic, Table};
use crate::partition::{partition, PartitionOptions, DEFAULT_ROOT_TOL};
use crate::region::{Interval, RegionSet};
use crate::report::OutputFormat;
use crate::sim::{Procedure, RngAlgorithm, Scenario, ScenarioModel};

pub const SPEC_VERSION: u32 = 1;
pub const DEFAULT_PLOT_GRID: usize = 512;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub spec_version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    pub parameter_space: ParameterSpace,
    pub actions: ActionsSection,
    pub loss: LossSection,
    #[serde(default)]
    pub hypotheses: Option<HypothesesSection>,
    #[serde(default)]
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub prior: Option<PriorSection>,
    #[serde(default)]
    pub decision: Option<DecisionSection>,
    #[serde(default)]
    pub comparators: Vec<Procedure>,
    #[serde(default)]
    pub scenario: Option<ScenarioSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionsSection {
    pub a0: String,
    pub a1: String,
    #[serde(default)]
    pub a0_description: Option<String>,
    #[serde(default)]
    pub a1_description: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    BuiltinCoinDemo,
    PiecewiseLinear,
    Quadratic,
    Table,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSection {
    pub kind: LossKind,
    #[serde(default)]
    pub params_a0: Option<toml::Value>,
    #[serde(default)]
    pub params_a1: Option<toml::Value>,
    /// Points used for validation and partition scans.
    #[serde(default)]
    pub grid_size: Option<usize>,
    #[serde(default)]
    pub root_tol: Option<f64>,
}

/// `θ`, `[lo, hi]` (closed) or `[lo, hi, lo_open, hi_open]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RegionEntry {
    Point(f64),
    Full(f64, f64, bool, bool),
    Closed(f64, f64),
}

impl RegionEntry {
    fn interval(self) -> Interval {
        match self {
            RegionEntry::Point(t) => Interval::point(t),
            RegionEntry::Full(lo, hi, lo_open, hi_open) => Interval::new(lo, hi, lo_open, hi_open),
            RegionEntry::Closed(lo, hi) => Interval::closed(lo, hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesesSection {
    pub h0: Vec<RegionEntry>,
    pub h1: Vec<RegionEntry>,
    /// Decide on `Θ0 ∪ Θ1` only when the pair does not cover the space.
    #[serde(default)]
    pub restricted_space: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSection {
    Binomial { n: u64, k: u64 },
    Normal { n: u64, ybar: f64, sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PriorSection {
    Beta(BetaPrior),
    Normal(NormalPrior),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaPrior {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalPrior {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionRule {
    #[default]
    HypothesisRatio,
    ExpectedLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionSection {
    #[serde(default = "unit_ratio")]
    pub loss_ratio: LossRatio,
    #[serde(default)]
    pub rule: DecisionRule,
}

fn unit_ratio() -> LossRatio {
    LossRatio::scalar(1.0).expect("1 is a valid ratio")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Binomial,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: String,
    pub family: ModelFamily,
    /// Observation sd; normal family only.
    #[serde(default)]
    pub sigma: Option<f64>,
    pub true_effect_grid: Vec<f64>,
    pub sample_size_grid: Vec<u64>,
    pub replicates: u64,
    #[serde(default)]
    pub rng: RngAlgorithm,
    pub procedures: Vec<Procedure>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub plot_path: Option<PathBuf>,
    /// Number of points at which plotted curves are sampled.
    #[serde(default)]
    pub plot_grid: Option<usize>,
}

fn section_error(key: &str, err: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {err}"))
}

fn missing(key: &str) -> Error {
    Error::Config(format!("missing section `{key}`"))
}

fn region(entries: &[RegionEntry]) -> Result<RegionSet> {
    RegionSet::new(entries.iter().map(|e| e.interval()))
}

impl ConfigDocument {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: ConfigDocument = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if doc.spec_version != SPEC_VERSION {
            return Err(Error::Config(format!(
                "spec_version: expected {SPEC_VERSION}, got {}",
                doc.spec_version
            )));
        }
        Ok(doc)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn space(&self) -> Result<ParameterSpace> {
        let s = self.parameter_space;
        s.check().map_err(|e| section_error("parameter_space", e))?;
        Ok(s)
    }

    pub fn action_pair(&self) -> Result<ActionPair> {
        ActionPair::new(&self.actions.a0, &self.actions.a1).map_err(|e| section_error("actions", e))
    }

    pub fn partition_options(&self) -> Result<PartitionOptions> {
        let opts = PartitionOptions {
            grid_size: self.loss.grid_size.unwrap_or(crate::loss::DEFAULT_GRID_SIZE),
            root_tol: self.loss.root_tol.unwrap_or(DEFAULT_ROOT_TOL),
        };
        opts.check().map_err(|e| section_error("loss", e))?;
        Ok(opts)
    }

    /// The loss function, validated on the configured grid.
    pub fn loss_spec(&self) -> Result<LossSpec> {
        let space = self.space()?;
        let loss = &self.loss;
        let spec = match loss.kind {
            LossKind::BuiltinCoinDemo => {
                if loss.params_a0.is_some() || loss.params_a1.is_some() {
                    return Err(Error::Config(
                        "loss: builtin_coin_demo takes no params_a0/params_a1".into(),
                    ));
                }
                let demo = LossSpec::coin_demo();
                if space != demo.space {
                    return Err(Error::Config(format!(
                        "parameter_space: builtin_coin_demo is defined on [{}, {}]",
                        demo.space.lo, demo.space.hi
                    )));
                }
                demo
            }
            kind => {
                let curve = |key: &str, value: &Option<toml::Value>| -> Result<LossCurve> {
                    let value = value
                        .clone()
                        .ok_or_else(|| Error::Config(format!("loss: missing `{key}`")))?;
                    let err = |e: toml::de::Error| section_error(&format!("loss.{key}"), e.message());
                    Ok(match kind {
                        LossKind::PiecewiseLinear => {
                            LossCurve::PiecewiseLinear(value.try_into::<PiecewiseLinear>().map_err(err)?)
                        }
                        LossKind::Quadratic => LossCurve::Quadratic(value.try_into::<Quadratic>().map_err(err)?),
                        LossKind::Table => LossCurve::Table(value.try_into::<Table>().map_err(err)?),
                        LossKind::BuiltinCoinDemo => unreachable!(),
                    })
                };
                LossSpec::new(
                    space,
                    curve("params_a0", &loss.params_a0)?,
                    curve("params_a1", &loss.params_a1)?,
                )
            }
        };
        let grid = self.partition_options()?.grid_size;
        spec.validate_with_grid(grid)
            .into_result()
            .map_err(|e| section_error("loss", e))?;
        Ok(spec)
    }

    /// The configured pair and its `restricted_space` flag, or the pair
    /// derived from the loss partition when no hypotheses are given.
    pub fn hypothesis_pair(&self, spec: &LossSpec) -> Result<(HypothesisPair, bool)> {
        match &self.hypotheses {
            Some(h) => {
                let h0 = region(&h.h0).map_err(|e| section_error("hypotheses.h0", e))?;
                let h1 = region(&h.h1).map_err(|e| section_error("hypotheses.h1", e))?;
                let pair = HypothesisPair::new(h0, h1, self.space()?).map_err(|e| section_error("hypotheses", e))?;
                Ok((pair, h.restricted_space))
            }
            None => {
                let part = partition(spec, &self.partition_options()?)?;
                Ok((derive_hypotheses(&part, spec.space), false))
            }
        }
    }

    pub fn require_hypotheses(&self) -> Result<&HypothesesSection> {
        self.hypotheses.as_ref().ok_or_else(|| missing("hypotheses"))
    }

    /// Prior for `family`: as configured, or Beta(1, 1) for binomial data.
    pub fn prior_for(&self, family: ModelFamily) -> Result<PosteriorModel> {
        let prior = match (family, self.prior) {
            (ModelFamily::Binomial, None) => PosteriorModel::Beta { alpha: 1.0, beta: 1.0 },
            (ModelFamily::Binomial, Some(PriorSection::Beta(p))) => PosteriorModel::Beta {
                alpha: p.alpha,
                beta: p.beta,
            },
            (ModelFamily::Normal, Some(PriorSection::Normal(p))) => PosteriorModel::Normal { mean: p.mean, sd: p.sd },
            (ModelFamily::Normal, None) => {
                return Err(Error::Config("prior: normal models need `mean` and `sd`".into()))
            }
            (ModelFamily::Binomial, Some(_)) => {
                return Err(Error::Config("prior: binomial models need `alpha` and `beta`".into()))
            }
            (ModelFamily::Normal, Some(_)) => {
                return Err(Error::Config("prior: normal models need `mean` and `sd`".into()))
            }
        };
        Ok(prior)
    }

    pub fn sampling_model(&self) -> Result<SamplingModel> {
        let model = self.model.ok_or_else(|| missing("model"))?;
        let sm = match model {
            ModelSection::Binomial { n, k } => {
                let PosteriorModel::Beta { alpha, beta } = self.prior_for(ModelFamily::Binomial)? else {
                    unreachable!()
                };
                SamplingModel::Binomial(BinomialModel {
                    n,
                    k,
                    prior_alpha: alpha,
                    prior_beta: beta,
                })
            }
            ModelSection::Normal { n, ybar, sigma } => {
                let PosteriorModel::Normal { mean, sd } = self.prior_for(ModelFamily::Normal)? else {
                    unreachable!()
                };
                SamplingModel::Normal(NormalKnownVarModel {
                    n,
                    ybar,
                    sigma,
                    prior_mean: mean,
                    prior_sd: sd,
                })
            }
        };
        sm.check().map_err(|e| section_error("model", e))?;
        Ok(sm)
    }

    pub fn decision(&self) -> Result<DecisionSection> {
        self.decision.ok_or_else(|| missing("decision"))
    }

    /// The simulation scenario; `seed_override` takes precedence over the
    /// document's `seed`.
    pub fn scenario(&self, seed_override: Option<u64>) -> Result<Scenario> {
        let sec = self.scenario.as_ref().ok_or_else(|| missing("scenario"))?;
        let seed = seed_override
            .or(self.seed)
            .ok_or_else(|| Error::Config("scenario: a `seed` is required".into()))?;
        let model = match (sec.family, sec.sigma) {
            (ModelFamily::Binomial, None) => ScenarioModel::Binomial,
            (ModelFamily::Normal, Some(sigma)) => ScenarioModel::Normal { sigma },
            (ModelFamily::Binomial, Some(_)) => {
                return Err(Error::Config(
                    "scenario: `sigma` applies to the normal family only".into(),
                ))
            }
            (ModelFamily::Normal, None) => return Err(Error::Config("scenario: normal family needs `sigma`".into())),
        };
        let loss = self.loss_spec()?;
        let (hypotheses, _) = self.hypothesis_pair(&loss)?;
        let scenario = Scenario {
            name: sec.name.clone(),
            model,
            prior: self.prior_for(sec.family)?,
            loss,
            hypotheses,
            true_effects: sec.true_effect_grid.clone(),
            sample_sizes: sec.sample_size_grid.clone(),
            replicates: sec.replicates,
            seed,
            rng: sec.rng,
            procedures: sec.procedures.clone(),
        };
        scenario.check().map_err(|e| section_error("scenario", e))?;
        Ok(scenario)
    }

    pub fn plot_grid(&self) -> Result<usize> {
        let n = self.output.plot_grid.unwrap_or(DEFAULT_PLOT_GRID);
        if n < 2 {
            return Err(Error::Config(format!("output.plot_grid must be at least 2, got {n}")));
        }
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COIN: &str = r#"
spec_version = 1
seed = 7

[parameter_space]
lo = -0.5
hi = 0.5

[actions]
a0 = "fair"
a1 = "biased"

[loss]
kind = "builtin_coin_demo"
"#;

    #[test]
    fn coin_demo_document() {
        let doc = ConfigDocument::from_toml_str(COIN).unwrap();
        assert_eq!(doc.loss_spec().unwrap(), LossSpec::coin_demo());
        assert_eq!(doc.action_pair().unwrap().a1_label, "biased");
        let (pair, restricted) = doc.hypothesis_pair(&doc.loss_spec().unwrap()).unwrap();
        assert!(!restricted);
        assert!(pair.h0.contains(0.106) && pair.h1.contains(0.2));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = COIN.replace("kind = ", "colour = \"red\"\nkind = ");
        let err = ConfigDocument::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        let text = format!("{COIN}\nextra = 1\n");
        assert!(ConfigDocument::from_toml_str(&text).is_err());
    }

    #[test]
    fn missing_loss_names_the_key() {
        let text = COIN.replace("[loss]\nkind = \"builtin_coin_demo\"\n", "");
        let err = ConfigDocument::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("loss"), "{err}");
        assert!(err.is_input_error());
    }

    #[test]
    fn wrong_version_is_rejected() {
        let text = COIN.replace("spec_version = 1", "spec_version = 2");
        assert!(ConfigDocument::from_toml_str(&text).is_err());
    }

    #[test]
    fn explicit_loss_kinds() {
        let text = COIN.replace(
            "kind = \"builtin_coin_demo\"",
            "kind = \"quadratic\"\nparams_a0 = { c = 1.0 }\nparams_a1 = { c = 0.0, offset = 0.01 }",
        );
        let spec = ConfigDocument::from_toml_str(&text).unwrap().loss_spec().unwrap();
        assert_eq!(
            spec.evaluate(0.2, crate::loss::Action::A0).unwrap(),
            0.04000000000000001
        );

        let text = COIN.replace(
            "kind = \"builtin_coin_demo\"",
            "kind = \"piecewise_linear\"\nparams_a0 = { kinks = [{ at = 0, weight = 1 }] }\nparams_a1 = { intercept = 0.1 }",
        );
        let spec = ConfigDocument::from_toml_str(&text).unwrap().loss_spec().unwrap();
        assert_eq!(spec.loss_difference(0.0).unwrap(), 0.1);

        let text = COIN.replace(
            "kind = \"builtin_coin_demo\"",
            "kind = \"table\"\nparams_a0 = { grid = [-0.5, 0.5], values = [1, 1] }\nparams_a1 = { grid = [-0.5, 0.5], values = [0, 2] }",
        );
        let spec = ConfigDocument::from_toml_str(&text).unwrap().loss_spec().unwrap();
        assert_eq!(spec.loss_difference(0.0).unwrap(), 0.0);
    }

    #[test]
    fn loss_param_errors() {
        let text = COIN.replace(
            "kind = \"builtin_coin_demo\"",
            "kind = \"quadratic\"\nparams_a0 = { c = 1.0, slope = 2 }\nparams_a1 = { c = 0.0 }",
        );
        let err = ConfigDocument::from_toml_str(&text).unwrap().loss_spec().unwrap_err();
        assert!(err.to_string().contains("loss.params_a0"), "{err}");

        let text = COIN.replace(
            "kind = \"builtin_coin_demo\"",
            "kind = \"quadratic\"\nparams_a0 = { c = -1.0 }\nparams_a1 = { c = 0.0 }",
        );
        let err = ConfigDocument::from_toml_str(&text).unwrap().loss_spec().unwrap_err();
        assert!(err.to_string().contains("negative loss"), "{err}");
    }

    #[test]
    fn hypothesis_entries() {
        let text = format!("{COIN}\n[hypotheses]\nh0 = [0.0]\nh1 = [[-0.5, -0.106, false, true], [0.106, 0.5]]\n");
        let doc = ConfigDocument::from_toml_str(&text).unwrap();
        let (pair, _) = doc.hypothesis_pair(&doc.loss_spec().unwrap()).unwrap();
        assert_eq!(pair.h0, RegionSet::points(&[0.0]).unwrap());
        assert!(pair.h1.contains(0.106) && !pair.h1.contains(-0.106));

        let text = format!("{COIN}\n[hypotheses]\nh0 = [[-0.2, 0.2]]\nh1 = [[0.1, 0.5]]\n");
        let doc = ConfigDocument::from_toml_str(&text).unwrap();
        let err = doc.hypothesis_pair(&doc.loss_spec().unwrap()).unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }

    #[test]
    fn models_and_priors() {
        let text = format!("{COIN}\n[model]\nfamily = \"binomial\"\nn = 20\nk = 20\n");
        let doc = ConfigDocument::from_toml_str(&text).unwrap();
        assert_eq!(
            doc.sampling_model().unwrap(),
            SamplingModel::Binomial(BinomialModel {
                n: 20,
                k: 20,
                prior_alpha: 1.0,
                prior_beta: 1.0
            })
        );
        let text = format!("{COIN}\n[model]\nfamily = \"normal\"\nn = 20\nybar = 0.1\nsigma = 1\n");
        let doc = ConfigDocument::from_toml_str(&text).unwrap();
        assert!(doc.sampling_model().is_err());
        let text = format!("{text}\n[prior]\nmean = 0\nsd = 1\n");
        assert!(ConfigDocument::from_toml_str(&text).unwrap().sampling_model().is_ok());
        let text = format!("{COIN}\n[model]\nfamily = \"poisson\"\nn = 3\n");
        assert!(ConfigDocument::from_toml_str(&text).is_err());
    }

    #[test]
    fn decision_section() {
        let text = format!("{COIN}\n[decision]\nloss_ratio = [0.01, 100]\n");
        let d = ConfigDocument::from_toml_str(&text).unwrap().decision().unwrap();
        assert_eq!(d.loss_ratio, LossRatio::interval(0.01, 100.0).unwrap());
        assert_eq!(d.rule, DecisionRule::HypothesisRatio);
        let text = format!("{COIN}\n[decision]\nloss_ratio = [100, 0.01]\n");
        assert!(ConfigDocument::from_toml_str(&text).is_err());
    }

    #[test]
    fn scenario_section() {
        let text = format!(
            "{COIN}\n[scenario]\nname = \"coin\"\nfamily = \"binomial\"\ntrue_effect_grid = [0.0]\n\
             sample_size_grid = [100]\nreplicates = 10\nprocedures = [{{ procedure = \"nhst\" }}, {{ procedure = \"rope\", mass = 0.9 }}]\n"
        );
        let doc = ConfigDocument::from_toml_str(&text).unwrap();
        let s = doc.scenario(None).unwrap();
        assert_eq!(s.seed, 7);
        assert_eq!(doc.scenario(Some(9)).unwrap().seed, 9);
        assert_eq!(s.procedures[1], Procedure::Rope { mass: 0.9, rope: None });

        let bad = text.replace("\"rope\"", "\"roper\"");
        assert!(ConfigDocument::from_toml_str(&bad).is_err());
        let bad = text.replace("replicates = 10", "replicates = 0");
        assert!(ConfigDocument::from_toml_str(&bad).unwrap().scenario(None).is_err());
    }
}
