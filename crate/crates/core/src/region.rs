//! Finite unions of disjoint intervals with explicit endpoint openness.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::ParameterSpace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn new(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_open,
            hi_open,
        }
    }

    pub fn point(at: f64) -> Self {
        Interval::closed(at, at)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    pub fn contains(&self, theta: f64) -> bool {
        let above = if self.lo_open {
            theta > self.lo
        } else {
            theta >= self.lo
        };
        let below = if self.hi_open {
            theta < self.hi
        } else {
            theta <= self.hi
        };
        above && below
    }

    pub fn length(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    /// Whether `self`, lying to the left of `next`, shares at least one point
    /// with it.
    fn overlaps_next(&self, next: &Interval) -> bool {
        self.hi > next.lo || (self.hi == next.lo && !self.hi_open && !next.lo_open)
    }

    /// Whether `self` and `next` touch so that their union is one interval.
    fn joins_next(&self, next: &Interval) -> bool {
        self.hi == next.lo && !(self.hi_open && next.lo_open)
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        if self.is_empty() || other.is_empty() {
            return false;
        }
        let (left, right) = if (self.lo, self.lo_open) <= (other.lo, other.lo_open) {
            (self, other)
        } else {
            (other, self)
        };
        left.overlaps_next(right)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi && !self.lo_open && !self.hi_open {
            return write!(f, "{{{}}}", self.lo);
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_open { '(' } else { '[' },
            self.lo,
            self.hi,
            if self.hi_open { ')' } else { ']' }
        )
    }
}

/// Sorted, pairwise disjoint intervals in canonical (merged) form.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct RegionSet {
    intervals: Vec<Interval>,
}

impl RegionSet {
    pub fn empty() -> Self {
        RegionSet::default()
    }

    /// Sorts, drops empty intervals and merges touching ones. Overlapping or
    /// non-finite input is rejected.
    pub fn new(intervals: impl IntoIterator<Item = Interval>) -> Result<Self> {
        let mut items: Vec<Interval> = Vec::new();
        for iv in intervals {
            if iv.lo.is_nan() || iv.hi.is_nan() {
                return Err(Error::validation("interval endpoints must not be NaN"));
            }
            if iv.lo > iv.hi {
                return Err(Error::validation(format!(
                    "interval lower bound {} exceeds upper bound {}",
                    iv.lo, iv.hi
                )));
            }
            if !iv.is_empty() {
                items.push(iv);
            }
        }
        items.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.lo_open.cmp(&b.lo_open)));
        let mut merged: Vec<Interval> = Vec::with_capacity(items.len());
        for iv in items {
            if let Some(last) = merged.last_mut() {
                if last.overlaps_next(&iv) {
                    return Err(Error::validation(format!("intervals {last} and {iv} overlap")));
                }
                if last.joins_next(&iv) {
                    last.hi = iv.hi;
                    last.hi_open = iv.hi_open;
                    continue;
                }
            }
            merged.push(iv);
        }
        Ok(RegionSet { intervals: merged })
    }

    pub fn single(iv: Interval) -> Self {
        RegionSet::new([iv]).expect("a single interval is always canonical")
    }

    pub fn full(space: &ParameterSpace) -> Self {
        RegionSet::single(Interval::closed(space.lo, space.hi))
    }

    pub fn points(points: &[f64]) -> Result<Self> {
        RegionSet::new(points.iter().map(|p| Interval::point(*p)))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(theta))
    }

    /// Total length; openness is ignored and points contribute nothing.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    /// Smallest closed interval containing the set.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.lo, self.intervals.last()?.hi))
    }

    pub fn within(&self, space: &ParameterSpace) -> bool {
        self.intervals.iter().all(|iv| iv.lo >= space.lo && iv.hi <= space.hi)
    }

    pub fn intersects(&self, other: &RegionSet) -> bool {
        self.intervals
            .iter()
            .any(|a| other.intervals.iter().any(|b| a.intersects(b)))
    }

    /// Every finite endpoint of the set, ascending.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .intervals
            .iter()
            .flat_map(|iv| [iv.lo, iv.hi])
            .filter(|v| v.is_finite())
            .collect();
        pts.dedup();
        pts
    }
}

impl TryFrom<Vec<Interval>> for RegionSet {
    type Error = Error;

    fn try_from(intervals: Vec<Interval>) -> Result<Self> {
        RegionSet::new(intervals)
    }
}

impl From<RegionSet> for Vec<Interval> {
    fn from(set: RegionSet) -> Self {
        set.intervals
    }
}

impl fmt::Display for RegionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("∅");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}
