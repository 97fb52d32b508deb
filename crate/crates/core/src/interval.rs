//! One-dimensional interval-set algebra.
//!
//! Endpoints are `f64` seconds. Open and closed endpoints are not
//! distinguished: a single point has zero measure and never changes a
//! probability. Endpoint comparisons use the absolute tolerance [`TOL`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Absolute endpoint tolerance in seconds.
pub const TOL: f64 = 1e-12;

/// Closed real interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, Error> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// Builds an interval from endpoints the caller already knows are ordered
    /// and finite.
    pub(crate) fn from_ordered(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "unordered interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Tolerance-aware membership. Points within [`TOL`] of an endpoint count
    /// as inside.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo - TOL && x <= self.hi + TOL
    }

    pub fn shift(&self, delta: f64) -> Self {
        Self {
            lo: self.lo + delta,
            hi: self.hi + delta,
        }
    }

    /// Intersection, `None` when the overlap is empty or a single point.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (hi - lo > TOL).then_some(Interval { lo, hi })
    }
}

impl From<Interval> for [f64; 2] {
    fn from(iv: Interval) -> Self {
        [iv.lo, iv.hi]
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from([lo, hi]: [f64; 2]) -> Result<Self, Self::Error> {
        Interval::new(lo, hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Sorted, pairwise-disjoint, non-adjacent union of intervals.
///
/// Every constructor normalizes, so the invariant holds for any value of this
/// type. Gaps between consecutive members are strictly larger than [`TOL`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates raw `(lo, hi)` pairs and normalizes them.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let raw = pairs
            .into_iter()
            .map(|(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::normalize(raw))
    }

    /// Sorts and merges. Members closer than [`TOL`] are fused; an isolated
    /// member narrower than [`TOL`] is dropped.
    pub fn normalize(mut raw: Vec<Interval>) -> Self {
        raw.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::with_capacity(raw.len());
        for iv in raw {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi + TOL => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        out.retain(|iv| iv.width() >= TOL);
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total length.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().fold(0.0, |acc, iv| acc + iv.width())
    }

    pub fn contains(&self, x: f64) -> bool {
        // First member whose upper end is not left of x.
        let idx = self.intervals.partition_point(|iv| iv.hi + TOL < x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains(x))
    }

    /// True when `x` lies within [`TOL`] of any member endpoint.
    pub fn near_endpoint(&self, x: f64) -> bool {
        self.intervals
            .iter()
            .any(|iv| (x - iv.lo).abs() <= TOL || (x - iv.hi).abs() <= TOL)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = Vec::with_capacity(self.len() + other.len());
        all.extend_from_slice(&self.intervals);
        all.extend_from_slice(&other.intervals);
        Self::normalize(all)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].lo.max(b[j].lo);
            let hi = a[i].hi.min(b[j].hi);
            if hi > lo {
                out.push(Interval { lo, hi });
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::normalize(out)
    }

    pub fn clip(&self, window: Interval) -> IntervalSet {
        let out = self
            .intervals
            .iter()
            .filter_map(|iv| {
                let lo = iv.lo.max(window.lo);
                let hi = iv.hi.min(window.hi);
                (hi > lo).then_some(Interval { lo, hi })
            })
            .collect();
        Self::normalize(out)
    }

    pub fn shift(&self, delta: f64) -> IntervalSet {
        Self::normalize(self.intervals.iter().map(|iv| iv.shift(delta)).collect())
    }

    /// `window` minus this set.
    pub fn complement_within(&self, window: Interval) -> IntervalSet {
        let mut out = Vec::new();
        let mut cursor = window.lo;
        for iv in self.clip(window).intervals {
            if iv.lo > cursor {
                out.push(Interval {
                    lo: cursor,
                    hi: iv.lo,
                });
            }
            cursor = cursor.max(iv.hi);
        }
        if window.hi > cursor {
            out.push(Interval {
                lo: cursor,
                hi: window.hi,
            });
        }
        Self::normalize(out)
    }
}

impl FromIterator<Interval> for IntervalSet {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        Self::normalize(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pairs: &[(f64, f64)]) -> IntervalSet {
        IntervalSet::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn pairs(s: &IntervalSet) -> Vec<(f64, f64)> {
        s.intervals().iter().map(|iv| (iv.lo(), iv.hi())).collect()
    }

    /// Fraction of a uniform grid covered by any raw pair, times the span.
    fn grid_measure(raw: &[(f64, f64)], lo: f64, hi: f64, step: f64) -> f64 {
        let n = ((hi - lo) / step).round() as usize;
        let hits = (0..n)
            .filter(|&i| {
                let x = lo + (i as f64 + 0.5) * step;
                raw.iter().any(|&(a, b)| x >= a && x <= b)
            })
            .count();
        hits as f64 * step
    }

    #[test]
    fn merges_overlapping() {
        assert_eq!(pairs(&set(&[(1.0, 2.0), (1.5, 3.0)])), vec![(1.0, 3.0)]);
    }

    #[test]
    fn empty_input() {
        let s = set(&[]);
        assert!(s.is_empty());
        assert_eq!(s.measure(), 0.0);
    }

    #[test]
    fn partial_overlap_matches_grid_scan() {
        let raw = [(0.0, 0.5), (0.2, 0.7)];
        let s = set(&raw);
        assert_eq!(pairs(&s), vec![(0.0, 0.7)]);
        let grid = grid_measure(&raw, -0.5, 1.5, 1e-4);
        assert!((grid - 0.7).abs() < 2e-4, "grid oracle {grid}");
        assert!((s.measure() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn measure_examples() {
        assert!((set(&[(0.0, 0.7)]).measure() - 0.7).abs() < 1e-15);
        assert!((set(&[(0.0, 0.5), (1.0, 1.5)]).measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_endpoints() {
        assert!(matches!(
            IntervalSet::from_pairs([(2.0, 1.0)]),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(IntervalSet::from_pairs([(0.0, f64::NAN)]).is_err());
        assert!(IntervalSet::from_pairs([(f64::NEG_INFINITY, 0.0)]).is_err());
    }

    #[test]
    fn drops_isolated_points_and_fuses_near_touching() {
        assert!(set(&[(1.0, 1.0)]).is_empty());
        let s = set(&[(0.0, 1.0), (1.0 + 1e-13, 2.0)]);
        assert_eq!(s.len(), 1);
        let s = set(&[(0.0, 1.0), (1.0 + 1e-9, 2.0)]);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn intersect_examples() {
        let a = set(&[(0.0, 0.5)]);
        let b = set(&[(0.2, 0.7)]);
        assert_eq!(pairs(&a.intersect(&b)), vec![(0.2, 0.5)]);
        let grid = grid_measure(&[(0.2, 0.5)], 0.0, 1.0, 1e-4);
        assert!((a.intersect(&b).measure() - grid).abs() < 2e-4);

        let unit = set(&[(0.0, 1.0)]);
        assert!(unit.intersect(&IntervalSet::empty()).is_empty());
        assert_eq!(unit.intersect(&unit), unit);
    }

    #[test]
    fn clip_shift_complement() {
        let s = set(&[(-1.0, 0.5), (0.8, 3.0)]);
        let w = Interval::new(0.0, 1.0).unwrap();
        assert_eq!(pairs(&s.clip(w)), vec![(0.0, 0.5), (0.8, 1.0)]);
        assert_eq!(pairs(&s.clip(w).complement_within(w)), vec![(0.5, 0.8)]);
        assert_eq!(
            pairs(&IntervalSet::empty().complement_within(w)),
            vec![(0.0, 1.0)]
        );
        let shifted = s.shift(2.0);
        assert!((shifted.measure() - s.measure()).abs() < 1e-12);
        assert_eq!(shifted.intervals()[0].lo(), 1.0);
    }

    #[test]
    fn membership() {
        let s = set(&[(0.0, 1.0), (2.0, 3.0)]);
        assert!(s.contains(0.5));
        assert!(s.contains(2.0));
        assert!(!s.contains(1.5));
        assert!(!s.contains(3.5));
        assert!(s.near_endpoint(1.0 + 5e-13));
        assert!(!s.near_endpoint(1.5));
    }

    #[test]
    fn interval_json_is_a_pair() {
        let iv = Interval::new(0.25, 0.5).unwrap();
        assert_eq!(serde_json::to_string(&iv).unwrap(), "[0.25,0.5]");
        let back: Interval = serde_json::from_str("[0.25,0.5]").unwrap();
        assert_eq!(back, iv);
        assert!(serde_json::from_str::<Interval>("[1.0,0.0]").is_err());
    }
}
