use serde::{Deserialize, Serialize};

/// Half-open interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Length of the overlap with `other`.
    pub fn overlap(&self, other: &Interval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }

    pub fn translate(&self, t: f64) -> Self {
        Self::new(self.lo + t, self.hi + t)
    }
}

/// Merge a list of intervals into sorted disjoint runs. Intervals whose gap
/// is at most `join_tol` are joined.
pub fn merge_intervals(mut ivs: Vec<Interval>, join_tol: f64) -> Vec<Interval> {
    ivs.retain(|iv| !iv.is_empty());
    ivs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
    for iv in ivs {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi + join_tol => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// Total length of `runs ∩ window`, for sorted disjoint `runs`.
pub fn covered_length(runs: &[Interval], window: &Interval) -> f64 {
    runs.iter().map(|r| r.overlap(window)).sum()
}
