//! Splitting the parameter space into negligible and practically relevant
//! effects.
//!
//! An effect `θ` is practically relevant when `L(θ, a1) < L(θ, a0)`, and
//! negligible otherwise (ties included). The partition scans `Δ(θ)` on a grid
//! that also contains every loss breakpoint, brackets each change of
//! preference and refines it by bisection. Crossing points belong to the
//! negligible set.
//!
//! Touching zeros of `Δ` without a sign change are not detected, nor are
//! features narrower than one grid step.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::loss::{Action, LossSpec, DEFAULT_GRID_SIZE};
use crate::region::{Interval, RegionSet};

pub const DEFAULT_ROOT_TOL: f64 = 1e-9;
pub const MIN_GRID_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionOptions {
    pub grid_size: usize,
    pub root_tol: f64,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        PartitionOptions {
            grid_size: DEFAULT_GRID_SIZE,
            root_tol: DEFAULT_ROOT_TOL,
        }
    }
}

impl PartitionOptions {
    pub fn check(&self) -> Result<()> {
        if self.grid_size < MIN_GRID_SIZE {
            return Err(Error::parameter(format!(
                "grid_size must be at least {MIN_GRID_SIZE}, got {}",
                self.grid_size
            )));
        }
        if !(self.root_tol > 0.0) || !self.root_tol.is_finite() {
            return Err(Error::parameter(format!(
                "root_tol must be positive, got {}",
                self.root_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelevancePartition {
    pub negligible: RegionSet,
    pub relevant: RegionSet,
    pub crossings: Vec<f64>,
}

impl RelevancePartition {
    /// Whether `θ` lies within `tol` of any crossing.
    pub fn near_crossing(&self, theta: f64, tol: f64) -> bool {
        self.crossings.iter().any(|c| (theta - c).abs() <= tol)
    }
}

/// `L(θ, a1) < L(θ, a0)`; equal losses count as negligible.
pub fn is_practically_relevant(spec: &LossSpec, theta: f64) -> Result<bool> {
    Ok(spec.preferred_action(theta)? == Action::A1)
}

/// Shrinks `[negligible_end, relevant_end]` (in either order) around the
/// point where the preference flips, until its width is at most `tol`.
fn bisect_boundary(spec: &LossSpec, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let rel_a = is_practically_relevant(spec, a)?;
    // Enough halvings to reach the tolerance from any finite bracket.
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if is_practically_relevant(spec, mid)? == rel_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    // One secant step inside the final bracket; exact where Δ is linear.
    let (da, db) = (spec.loss_difference(a)?, spec.loss_difference(b)?);
    let mut root = 0.5 * (a + b);
    if da != db {
        let secant = a - da * (b - a) / (db - da);
        if secant.is_finite() && within(secant, a, b) {
            root = secant;
        }
    }
    let snapped = round_sig(root, CROSSING_DIGITS);
    Ok(if within(snapped, a, b) { snapped } else { root })
}

/// Significant digits kept for crossings that stay inside their bracket.
const CROSSING_DIGITS: usize = 12;

fn within(t: f64, a: f64, b: f64) -> bool {
    (t - a) * (t - b) <= 0.0
}

fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

pub fn partition(spec: &LossSpec, opts: &PartitionOptions) -> Result<RelevancePartition> {
    opts.check()?;
    spec.validate_with_grid(opts.grid_size).into_result()?;

    let grid = spec.scan_grid(opts.grid_size);
    let classes = grid
        .iter()
        .map(|&t| is_practically_relevant(spec, t))
        .collect::<Result<Vec<bool>>>()?;

    let mut crossings = Vec::new();
    for i in 1..grid.len() {
        if classes[i] != classes[i - 1] {
            crossings.push(bisect_boundary(spec, grid[i - 1], grid[i], opts.root_tol)?);
        }
    }

    let space = spec.space;
    let mut cuts = Vec::with_capacity(crossings.len() + 2);
    cuts.push(space.lo);
    cuts.extend(crossings.iter().copied());
    cuts.push(space.hi);

    let mut negligible = Vec::new();
    let mut relevant = Vec::new();
    let last = cuts.len() - 2;
    for (i, seg) in cuts.windows(2).enumerate() {
        let (lo, hi) = (seg[0], seg[1]);
        let mid = 0.5 * (lo + hi);
        if is_practically_relevant(spec, mid)? {
            // Crossings are negligible; the outer edges of the space are closed.
            relevant.push(Interval::new(lo, hi, i > 0, i < last));
        } else {
            negligible.push(Interval::closed(lo, hi));
        }
    }
    // A relevant segment wedged between two crossings leaves its crossings
    // as negligible points.
    for (i, c) in crossings.iter().enumerate() {
        let left_rel = relevant.iter().any(|iv| iv.hi == *c);
        let right_rel = relevant.iter().any(|iv| iv.lo == *c);
        if left_rel && right_rel {
            negligible.push(Interval::point(crossings[i]));
        }
    }

    Ok(RelevancePartition {
        negligible: RegionSet::new(negligible)?,
        relevant: RegionSet::new(relevant)?,
        crossings,
    })
}
