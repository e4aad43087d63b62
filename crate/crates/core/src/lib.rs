//! Practical relevance as a two-action decision problem.
//!
//! A loss function `L(θ, a)` over a bounded effect space and two actions
//! (`a0`, appropriate when the effect is absent, and `a1`) splits the space
//! into negligible effects (`a0` preferred or tied) and practically relevant
//! effects (`a1` strictly preferred). From there the crate
//!
//! * derives hypothesis pairs and checks whether a given pair incorporates
//!   practical relevance completely or partially ([`hypotheses`]);
//! * computes conjugate posteriors for binomial and known-variance normal
//!   data ([`inference`]);
//! * decides between the actions from posterior odds and a (possibly
//!   interval-valued) loss ratio, or from posterior expected loss
//!   ([`decision`]);
//! * runs classical baselines next to it ([`comparators`]) and tabulates
//!   operating characteristics by simulation ([`sim`]).
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comparators;
pub mod config;
pub mod decision;
pub mod error;
pub mod hypotheses;
pub mod inference;
pub mod loss;
pub mod partition;
pub mod plot;
pub mod quadrature;
pub mod region;
pub mod report;
pub mod sim;
pub mod special;

pub use decision::{Decision, DecisionOutcome, LossRatio};
pub use error::{Error, Result};
pub use hypotheses::{HypothesisPair, Verdict};
pub use inference::{BinomialModel, NormalKnownVarModel, PosteriorModel, SamplingModel};
pub use loss::{Action, LossCurve, LossSpec, ParameterSpace};
pub use partition::{PartitionOptions, RelevancePartition};
pub use region::{Interval, RegionSet};
