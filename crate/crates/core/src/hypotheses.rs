//! Hypothesis pairs and whether they incorporate practical relevance.
//!
//! A pair `H0: θ ∈ Θ0` vs `H1: θ ∈ Θ1` incorporates practical relevance
//! *completely* when every negligible effect is in `Θ0` and every relevant
//! effect is in `Θ1`, and *partially* when `Θ0` holds only negligible effects
//! and `Θ1` only relevant ones. Both conditions quantify over a continuum and
//! are checked on a dense grid that includes every region endpoint and its
//! `±root_tol` neighbours. Grid points within `root_tol` of a loss crossing
//! are skipped, since their classification is numerically indeterminate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::loss::{LossSpec, ParameterSpace};
use crate::partition::{is_practically_relevant, partition, PartitionOptions, RelevancePartition};
use crate::region::RegionSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisPair {
    pub h0: RegionSet,
    pub h1: RegionSet,
    #[serde(skip)]
    pub space: ParameterSpace,
}

impl HypothesisPair {
    pub fn new(h0: RegionSet, h1: RegionSet, space: ParameterSpace) -> Result<Self> {
        space.check()?;
        if h0.intersects(&h1) {
            return Err(Error::validation(format!("hypotheses overlap: H0 = {h0}, H1 = {h1}")));
        }
        for (name, set) in [("H0", &h0), ("H1", &h1)] {
            if !set.within(&space) {
                return Err(Error::validation(format!(
                    "{name} = {set} leaves the parameter space [{}, {}]",
                    space.lo, space.hi
                )));
            }
        }
        Ok(HypothesisPair { h0, h1, space })
    }

    /// Measure of the space not claimed by either hypothesis.
    pub fn uncovered_measure(&self) -> f64 {
        (self.space.width() - self.h0.measure() - self.h1.measure()).max(0.0)
    }

    /// Whether the two hypotheses cover the space up to a null set.
    pub fn covers_space(&self) -> bool {
        self.uncovered_measure() <= 1e-12 * self.space.width().max(1.0)
    }

    pub fn region(&self, hypothesis: Hypothesis) -> &RegionSet {
        match hypothesis {
            Hypothesis::H0 => &self.h0,
            Hypothesis::H1 => &self.h1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hypothesis {
    H0,
    H1,
}

/// The pair that completely incorporates practical relevance:
/// `Θ0` = negligible effects, `Θ1` = relevant effects.
pub fn derive_hypotheses(partition: &RelevancePartition, space: ParameterSpace) -> HypothesisPair {
    HypothesisPair {
        h0: partition.negligible.clone(),
        h1: partition.relevant.clone(),
        space,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    /// First grid point at which the condition fails.
    pub witness: Option<f64>,
}

impl Verdict {
    fn from_witness(witness: Option<f64>) -> Self {
        Verdict {
            holds: witness.is_none(),
            witness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncorporationReport {
    pub complete: Verdict,
    pub partial: Verdict,
}

struct CheckContext {
    grid: Vec<f64>,
    partition: RelevancePartition,
    root_tol: f64,
}

impl CheckContext {
    fn new(pair: &HypothesisPair, spec: &LossSpec, opts: &PartitionOptions) -> Result<Self> {
        if pair.space != spec.space {
            return Err(Error::validation(
                "hypotheses and loss are defined on different parameter spaces",
            ));
        }
        let partition = partition(spec, opts)?;
        let space = spec.space;
        let mut grid = spec.scan_grid(opts.grid_size);
        for e in pair.h0.endpoints().into_iter().chain(pair.h1.endpoints()) {
            for t in [e - opts.root_tol, e, e + opts.root_tol] {
                if space.contains(t) {
                    grid.push(t);
                }
            }
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        Ok(CheckContext {
            grid,
            partition,
            root_tol: opts.root_tol,
        })
    }

    /// Grid points away from loss crossings, with their relevance.
    fn classified<'a>(&'a self, spec: &'a LossSpec) -> impl Iterator<Item = Result<(f64, bool)>> + 'a {
        self.grid
            .iter()
            .copied()
            .filter(|t| !self.partition.near_crossing(*t, self.root_tol))
            .map(move |t| Ok((t, is_practically_relevant(spec, t)?)))
    }
}

fn complete_witness(
    ctx: &CheckContext,
    pair: &HypothesisPair,
    spec: &LossSpec,
    restricted: bool,
) -> Result<Option<f64>> {
    for item in ctx.classified(spec) {
        let (t, relevant) = item?;
        if restricted && !(pair.h0.contains(t) || pair.h1.contains(t)) {
            continue;
        }
        let ok = if relevant {
            pair.h1.contains(t)
        } else {
            pair.h0.contains(t)
        };
        if !ok {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

fn partial_witness(ctx: &CheckContext, pair: &HypothesisPair, spec: &LossSpec) -> Result<Option<f64>> {
    for item in ctx.classified(spec) {
        let (t, relevant) = item?;
        if (pair.h0.contains(t) && relevant) || (pair.h1.contains(t) && !relevant) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Θ0 contains all negligible and Θ1 all relevant effects.
pub fn check_complete(pair: &HypothesisPair, spec: &LossSpec, opts: &PartitionOptions) -> Result<Verdict> {
    let ctx = CheckContext::new(pair, spec, opts)?;
    Ok(Verdict::from_witness(complete_witness(&ctx, pair, spec, false)?))
}

/// Θ0 contains only negligible and Θ1 only relevant effects.
pub fn check_partial(pair: &HypothesisPair, spec: &LossSpec, opts: &PartitionOptions) -> Result<Verdict> {
    let ctx = CheckContext::new(pair, spec, opts)?;
    Ok(Verdict::from_witness(partial_witness(&ctx, pair, spec)?))
}

/// Complete incorporation on the restricted space `Θ0 ∪ Θ1`.
pub fn check_complete_restricted(pair: &HypothesisPair, spec: &LossSpec, opts: &PartitionOptions) -> Result<Verdict> {
    let ctx = CheckContext::new(pair, spec, opts)?;
    Ok(Verdict::from_witness(complete_witness(&ctx, pair, spec, true)?))
}

/// Both verdicts from a single grid and partition.
pub fn check_incorporation(
    pair: &HypothesisPair,
    spec: &LossSpec,
    opts: &PartitionOptions,
) -> Result<IncorporationReport> {
    let ctx = CheckContext::new(pair, spec, opts)?;
    Ok(IncorporationReport {
        complete: Verdict::from_witness(complete_witness(&ctx, pair, spec, false)?),
        partial: Verdict::from_witness(partial_witness(&ctx, pair, spec)?),
    })
}
