//! Monte-Carlo operating characteristics.
//!
//! A scenario sweeps a grid of true effects and sample sizes, draws
//! `replicates` datasets per cell and runs every configured procedure on each,
//! tabulating how often each verdict occurs.
//!
//! Random numbers come from ChaCha20 (`rand_chacha`). Each dataset gets its
//! own generator whose 256-bit key is derived with SplitMix64 from
//! `(seed, true_effect bits, n, replicate)`, so any cell or replicate can be
//! regenerated in isolation and results do not depend on execution order or
//! thread count. Binomial counts are drawn with `rand_distr::Binomial`,
//! normal sample means with `rand_distr::StandardNormal`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparators::{
    interval_bayes_factor, nhst_point_null, rope_decision, tost_equivalence, ComparatorResult, DEFAULT_BF_THRESHOLD,
};
use crate::decision::{bayes_two_action_decision, expected_loss_decision_with, DecisionOutcome, LossRatio};
use crate::error::{Error, Result};
use crate::hypotheses::HypothesisPair;
use crate::inference::{BinomialModel, NormalKnownVarModel, PosteriorModel, SamplingModel, BIAS_SHIFT};
use crate::loss::LossSpec;
use crate::region::{Interval, RegionSet};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one `(true_effect, n, replicate)` draw.
pub fn cell_rng(seed: u64, true_effect: f64, n: u64, replicate: u64) -> ChaCha20Rng {
    let mut h = splitmix64(seed);
    for word in [true_effect.to_bits(), n, replicate] {
        h = splitmix64(h ^ splitmix64(word));
    }
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        let w = splitmix64(h.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN_GAMMA)));
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    ChaCha20Rng::from_seed(key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RngAlgorithm {
    #[default]
    Chacha20,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ScenarioModel {
    /// Coin flips; the effect is the bias `π − 0.5`.
    Binomial,
    /// Known-variance normal observations with mean equal to the effect.
    Normal { sigma: f64 },
}

/// One procedure to run on each simulated (or observed) dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "procedure", rename_all = "snake_case", deny_unknown_fields)]
pub enum Procedure {
    Nhst {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    /// Normal model only; bounds default to the hull of `Θ0`.
    Tost {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        bounds: Option<[f64; 2]>,
    },
    /// ROPE defaults to `Θ0`, which must then be a single interval.
    Rope {
        #[serde(default = "default_mass")]
        mass: f64,
        #[serde(default)]
        rope: Option<[f64; 2]>,
    },
    BayesFactor {
        #[serde(default = "default_bf_threshold")]
        threshold: f64,
    },
    HypothesisRatio {
        #[serde(default = "default_ratio")]
        loss_ratio: LossRatio,
        #[serde(default)]
        restricted_space: bool,
    },
    ExpectedLoss,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_mass() -> f64 {
    0.95
}

fn default_bf_threshold() -> f64 {
    DEFAULT_BF_THRESHOLD
}

fn default_ratio() -> LossRatio {
    LossRatio::scalar(1.0).expect("1 is a valid ratio")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProcedureOutput {
    Comparator(ComparatorResult),
    Decision(DecisionOutcome),
}

impl ProcedureOutput {
    pub fn verdict(&self) -> &'static str {
        match self {
            ProcedureOutput::Comparator(c) => c.verdict,
            ProcedureOutput::Decision(d) => d.decision.label(),
        }
    }
}

/// What procedures need besides the data.
#[derive(Debug, Clone)]
pub struct ProcedureContext<'a> {
    pub loss: &'a LossSpec,
    pub hypotheses: &'a HypothesisPair,
}

impl Procedure {
    pub fn name(&self) -> &'static str {
        match self {
            Procedure::Nhst { .. } => "nhst",
            Procedure::Tost { .. } => "tost",
            Procedure::Rope { .. } => "rope",
            Procedure::BayesFactor { .. } => "bayes_factor",
            Procedure::HypothesisRatio { .. } => "hypothesis_ratio",
            Procedure::ExpectedLoss => "expected_loss",
        }
    }

    pub fn verdict_labels(&self) -> &'static [&'static str] {
        match self {
            Procedure::Nhst { .. } => &["reject", "not_reject"],
            Procedure::Tost { .. } => &["equivalent", "not_equivalent"],
            Procedure::Rope { .. } => &["accept_a0", "accept_a1", "withhold"],
            Procedure::BayesFactor { .. } => &["favors_h1", "favors_h0", "inconclusive"],
            Procedure::HypothesisRatio { .. } => &["a0", "a1", "indeterminate"],
            Procedure::ExpectedLoss => &["a0", "a1"],
        }
    }

    /// Settings that can be checked without data.
    pub fn check(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::parameter(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        match self {
            Procedure::Nhst { alpha } | Procedure::Tost { alpha, .. } => unit("alpha", *alpha),
            Procedure::Rope { mass, .. } => unit("mass", *mass),
            Procedure::BayesFactor { threshold } if !(*threshold >= 1.0) => Err(Error::parameter(format!(
                "Bayes factor threshold must be ≥ 1, got {threshold}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, ctx: &ProcedureContext<'_>, model: &SamplingModel) -> Result<ProcedureOutput> {
        let out = match self {
            Procedure::Nhst { alpha } => ProcedureOutput::Comparator(nhst_point_null(model, *alpha)?),
            Procedure::Tost { alpha, bounds } => {
                let SamplingModel::Normal(m) = model else {
                    return Err(Error::parameter("TOST is implemented for the normal model only"));
                };
                let bounds = match bounds {
                    Some([lo, hi]) => (*lo, *hi),
                    None => ctx
                        .hypotheses
                        .h0
                        .hull()
                        .ok_or_else(|| Error::parameter("TOST bounds default to Θ0, which is empty"))?,
                };
                ProcedureOutput::Comparator(tost_equivalence(m, bounds, *alpha)?)
            }
            Procedure::Rope { mass, rope } => {
                let rope = match rope {
                    Some([lo, hi]) => RegionSet::new([Interval::closed(*lo, *hi)])?,
                    None => ctx.hypotheses.h0.clone(),
                };
                ProcedureOutput::Comparator(rope_decision(&model.posterior()?, &rope, *mass)?)
            }
            Procedure::BayesFactor { threshold } => {
                ProcedureOutput::Comparator(interval_bayes_factor(model, ctx.hypotheses, *threshold)?)
            }
            Procedure::HypothesisRatio {
                loss_ratio,
                restricted_space,
            } => ProcedureOutput::Decision(bayes_two_action_decision(
                &model.posterior()?,
                ctx.hypotheses,
                loss_ratio,
                *restricted_space,
            )?),
            Procedure::ExpectedLoss => ProcedureOutput::Decision(expected_loss_decision_with(
                &model.posterior()?,
                ctx.loss,
                ctx.hypotheses,
            )?),
        };
        Ok(out)
    }
}

/// Display label of each procedure; repeated procedure kinds are numbered
/// by position (`nhst#1`, `nhst#3`).
pub fn procedure_labels(procedures: &[Procedure]) -> Vec<String> {
    procedures
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if procedures.iter().filter(|q| q.name() == p.name()).count() > 1 {
                format!("{}#{}", p.name(), i + 1)
            } else {
                p.name().to_string()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub model: ScenarioModel,
    pub prior: PosteriorModel,
    pub loss: LossSpec,
    pub hypotheses: HypothesisPair,
    pub true_effects: Vec<f64>,
    pub sample_sizes: Vec<u64>,
    pub replicates: u64,
    pub seed: u64,
    pub rng: RngAlgorithm,
    pub procedures: Vec<Procedure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Dataset {
    Binomial { n: u64, k: u64 },
    Normal { n: u64, ybar: f64 },
}

impl Scenario {
    pub fn check(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::parameter("scenario needs at least one replicate"));
        }
        if self.true_effects.is_empty() || self.sample_sizes.is_empty() {
            return Err(Error::parameter("scenario needs true effects and sample sizes"));
        }
        if self.procedures.is_empty() {
            return Err(Error::parameter("scenario needs at least one procedure"));
        }
        for p in &self.procedures {
            p.check()?;
        }
        for &t in &self.true_effects {
            self.loss.space.check_contains(t)?;
        }
        match (self.model, self.prior) {
            (ScenarioModel::Binomial, PosteriorModel::Beta { .. }) => {
                for &t in &self.true_effects {
                    if !(-BIAS_SHIFT..=1.0 - BIAS_SHIFT).contains(&t) {
                        return Err(Error::parameter(format!(
                            "binomial true effect {t} lies outside [−0.5, 0.5]"
                        )));
                    }
                }
            }
            (ScenarioModel::Normal { sigma }, PosteriorModel::Normal { .. }) => {
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::parameter(format!("sigma must be positive, got {sigma}")));
                }
                if self.sample_sizes.contains(&0) {
                    return Err(Error::parameter("normal scenarios need n ≥ 1"));
                }
            }
            _ => return Err(Error::parameter("prior family does not match the sampling model")),
        }
        Ok(())
    }

    pub fn procedure_labels(&self) -> Vec<String> {
        procedure_labels(&self.procedures)
    }

    pub fn model_for(&self, data: &Dataset) -> SamplingModel {
        match (*data, self.prior, self.model) {
            (Dataset::Binomial { n, k }, PosteriorModel::Beta { alpha, beta }, _) => {
                SamplingModel::Binomial(BinomialModel {
                    n,
                    k,
                    prior_alpha: alpha,
                    prior_beta: beta,
                })
            }
            (Dataset::Normal { n, ybar }, PosteriorModel::Normal { mean, sd }, ScenarioModel::Normal { sigma }) => {
                SamplingModel::Normal(NormalKnownVarModel {
                    n,
                    ybar,
                    sigma,
                    prior_mean: mean,
                    prior_sd: sd,
                })
            }
            _ => unreachable!("Scenario::check rejects mismatched model and prior"),
        }
    }
}

/// Draws the sufficient statistic of one dataset.
pub fn simulate_dataset(scenario: &Scenario, true_effect: f64, n: u64, replicate: u64) -> Result<Dataset> {
    let mut rng = cell_rng(scenario.seed, true_effect, n, replicate);
    match scenario.model {
        ScenarioModel::Binomial => {
            let p = (true_effect + BIAS_SHIFT).clamp(0.0, 1.0);
            let dist = Binomial::new(n, p).map_err(|e| Error::parameter(e.to_string()))?;
            Ok(Dataset::Binomial {
                n,
                k: dist.sample(&mut rng),
            })
        }
        ScenarioModel::Normal { sigma } => {
            if n == 0 {
                return Err(Error::parameter("normal datasets need n ≥ 1"));
            }
            let z: f64 = StandardNormal.sample(&mut rng);
            Ok(Dataset::Normal {
                n,
                ybar: true_effect + sigma / (n as f64).sqrt() * z,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub true_effect: f64,
    pub n: u64,
    pub procedure: String,
    pub verdict: String,
    pub count: u64,
    pub frequency: f64,
    /// Monte-Carlo standard error `sqrt(f(1 − f)/R)`.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTable {
    pub scenario: String,
    pub rng: RngAlgorithm,
    pub seed: u64,
    pub replicates: u64,
    pub rows: Vec<RateRow>,
}

impl RateTable {
    pub fn row(&self, true_effect: f64, n: u64, procedure: &str, verdict: &str) -> Option<&RateRow> {
        self.rows
            .iter()
            .find(|r| r.true_effect == true_effect && r.n == n && r.procedure == procedure && r.verdict == verdict)
    }

    pub fn frequency(&self, true_effect: f64, n: u64, procedure: &str, verdict: &str) -> Option<f64> {
        self.row(true_effect, n, procedure, verdict).map(|r| r.frequency)
    }
}

/// All verdict rows of one `(true_effect, n)` cell.
pub fn run_cell(scenario: &Scenario, true_effect: f64, n: u64) -> Result<Vec<RateRow>> {
    let ctx = ProcedureContext {
        loss: &scenario.loss,
        hypotheses: &scenario.hypotheses,
    };
    let labels = scenario.procedure_labels();
    let mut counts: Vec<Vec<u64>> = scenario
        .procedures
        .iter()
        .map(|p| vec![0; p.verdict_labels().len() + 1])
        .collect();
    for rep in 0..scenario.replicates {
        let data = simulate_dataset(scenario, true_effect, n, rep)?;
        let model = scenario.model_for(&data);
        for (proc, slots) in scenario.procedures.iter().zip(counts.iter_mut()) {
            let idx = match proc.evaluate(&ctx, &model) {
                Ok(out) => proc
                    .verdict_labels()
                    .iter()
                    .position(|l| *l == out.verdict())
                    .unwrap_or(slots.len() - 1),
                Err(_) => slots.len() - 1,
            };
            slots[idx] += 1;
        }
    }
    let reps = scenario.replicates as f64;
    let mut rows = Vec::new();
    for ((proc, label), slots) in scenario.procedures.iter().zip(&labels).zip(&counts) {
        let verdicts = proc.verdict_labels().iter().copied().chain(["error"]);
        for (verdict, &count) in verdicts.zip(slots) {
            let f = count as f64 / reps;
            rows.push(RateRow {
                true_effect,
                n,
                procedure: label.clone(),
                verdict: verdict.to_string(),
                count,
                frequency: f,
                std_error: (f * (1.0 - f) / reps).sqrt(),
            });
        }
    }
    Ok(rows)
}

pub fn run_operating_characteristics(scenario: &Scenario) -> Result<RateTable> {
    run_operating_characteristics_with_threads(scenario, 1)
}

/// Runs every cell, on up to `threads` worker threads. The table is
/// identical for any thread count.
pub fn run_operating_characteristics_with_threads(scenario: &Scenario, threads: usize) -> Result<RateTable> {
    scenario.check()?;
    let cells: Vec<(f64, u64)> = scenario
        .true_effects
        .iter()
        .flat_map(|&t| scenario.sample_sizes.iter().map(move |&n| (t, n)))
        .collect();
    let per_cell: Vec<Result<Vec<RateRow>>> = if threads <= 1 {
        cells.iter().map(|&(t, n)| run_cell(scenario, t, n)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?;
        pool.install(|| cells.par_iter().map(|&(t, n)| run_cell(scenario, t, n)).collect())
    };
    let mut rows = Vec::new();
    for cell in per_cell {
        rows.extend(cell?);
    }
    Ok(RateTable {
        scenario: scenario.name.clone(),
        rng: scenario.rng,
        seed: scenario.seed,
        replicates: scenario.replicates,
        rows,
    })
}
