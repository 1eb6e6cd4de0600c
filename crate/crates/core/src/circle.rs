//! Points, arcs and arc unions on the circle R/Z.
//!
//! Positions are fractional coordinates in `[0, 1)`; the metric is the
//! wraparound distance `min(|x - y|, 1 - |x - y|)`, so no distance exceeds 1/2.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A position on the circle, normalized into `[0, 1)`.
#[derive(Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(value: f64) -> CirclePoint {
        debug_assert!(value.is_finite(), "circle point from non-finite value");
        let mut v = value.rem_euclid(1.0);
        // rem_euclid can round up to 1.0 for tiny negative inputs
        if v >= 1.0 {
            v = 0.0;
        }
        CirclePoint(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Wraparound metric; always in `[0, 1/2]`.
    pub fn distance(self, other: CirclePoint) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(1.0 - d)
    }

    /// Forward (counter-clockwise) offset from `self` to `other`, in `[0, 1)`.
    pub fn offset_to(self, other: CirclePoint) -> f64 {
        (other.0 - self.0).rem_euclid(1.0)
    }

    pub fn translate(self, delta: f64) -> CirclePoint {
        CirclePoint::new(self.0 + delta)
    }
}

impl From<f64> for CirclePoint {
    fn from(v: f64) -> Self {
        CirclePoint::new(v)
    }
}

impl fmt::Debug for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An arc `[start, start + length)` with wraparound; `length = 1` is the
/// full circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: CirclePoint,
    pub length: f64,
}

impl Arc {
    pub fn new(start: impl Into<CirclePoint>, length: f64) -> Arc {
        assert!(
            length > 0.0 && length <= 1.0,
            "arc length must lie in (0, 1], got {length}"
        );
        Arc {
            start: start.into(),
            length,
        }
    }

    /// Arc from `lo` running forward to `hi`; equal endpoints give the full circle.
    pub fn from_endpoints(lo: impl Into<CirclePoint>, hi: impl Into<CirclePoint>) -> Arc {
        let lo = lo.into();
        let hi = hi.into();
        let mut len = lo.offset_to(hi);
        if len == 0.0 {
            len = 1.0;
        }
        Arc {
            start: lo,
            length: len,
        }
    }

    pub fn end(&self) -> CirclePoint {
        self.start.translate(self.length)
    }

    pub fn midpoint(&self) -> CirclePoint {
        self.start.translate(self.length / 2.0)
    }

    pub fn is_full_circle(&self) -> bool {
        self.length >= 1.0
    }

    pub fn contains(&self, x: CirclePoint) -> bool {
        self.is_full_circle() || self.start.offset_to(x) < self.length
    }

    /// Membership allowing both endpoints, with a symmetric tolerance.
    pub fn contains_closed(&self, x: CirclePoint, tol: f64) -> bool {
        if self.is_full_circle() {
            return true;
        }
        let off = self.start.offset_to(x);
        off <= self.length + tol || off >= 1.0 - tol
    }

    /// Largest `r` such that the ball `B(x, r)` stays inside the arc.
    pub fn depth_of(&self, x: CirclePoint) -> f64 {
        if self.is_full_circle() {
            return 0.5;
        }
        let off = self.start.offset_to(x);
        if off >= self.length {
            0.0
        } else {
            off.min(self.length - off)
        }
    }

    /// Shrink the arc by `margin` on both sides.
    pub fn shrink(&self, margin: f64) -> Option<Arc> {
        let len = self.length - 2.0 * margin;
        if len <= 0.0 {
            None
        } else {
            Some(Arc::new(self.start.translate(margin), len))
        }
    }

    pub fn grow(&self, margin: f64) -> Arc {
        let len = (self.length + 2.0 * margin).min(1.0);
        Arc::new(self.start.translate(-margin), len)
    }
}

/// A normalized union of pairwise-disjoint arcs, sorted by start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcUnion {
    arcs: Vec<Arc>,
}

impl ArcUnion {
    /// Merge overlapping input arcs into a disjoint sorted union.
    pub fn new(input: Vec<Arc>) -> ArcUnion {
        assert!(!input.is_empty(), "arc union of no arcs");
        if input.iter().any(Arc::is_full_circle) {
            return ArcUnion {
                arcs: vec![Arc::new(0.0, 1.0)],
            };
        }
        // unroll each arc to (lo, hi) on the line with lo in [0, 1)
        let mut intervals: Vec<(f64, f64)> = input
            .iter()
            .map(|a| (a.start.value(), a.start.value() + a.length))
            .collect();
        intervals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some((_, end)) if lo <= *end => *end = end.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        // the last interval may wrap past 1 and collide with leading ones
        loop {
            if merged.len() < 2 {
                break;
            }
            let (last_lo, last_hi) = *merged.last().unwrap();
            let (first_lo, first_hi) = merged[0];
            if last_hi - 1.0 >= first_lo {
                let absorbed_hi = last_hi.max(first_hi + 1.0);
                merged.remove(0);
                let n = merged.len();
                merged[n - 1] = (last_lo, absorbed_hi);
            } else {
                break;
            }
        }
        let arcs = merged
            .into_iter()
            .map(|(lo, hi)| Arc::new(lo, (hi - lo).min(1.0)))
            .collect();
        ArcUnion { arcs }
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length).sum::<f64>().min(1.0)
    }

    pub fn contains(&self, x: CirclePoint) -> bool {
        self.arcs.iter().any(|a| a.contains(x))
    }

    pub fn is_full_circle(&self) -> bool {
        self.arcs.iter().any(Arc::is_full_circle) || self.total_length() >= 1.0
    }

    /// A proper interval-domain is neither empty nor the whole circle.
    pub fn is_proper(&self) -> bool {
        !self.arcs.is_empty() && !self.is_full_circle()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_lands_in_unit_interval() {
        assert_eq!(CirclePoint::new(1.25).value(), 0.25);
        assert_eq!(CirclePoint::new(-0.25).value(), 0.75);
        assert_eq!(CirclePoint::new(3.0).value(), 0.0);
        let tiny = CirclePoint::new(-1e-20).value();
        assert!((0.0..1.0).contains(&tiny));
    }

    #[test]
    fn metric_is_wraparound() {
        let a = CirclePoint::new(0.1);
        let b = CirclePoint::new(0.9);
        assert!((a.distance(b) - 0.2).abs() < 1e-15);
        assert!((CirclePoint::new(0.0).distance(CirclePoint::new(0.5)) - 0.5).abs() < 1e-15);
        assert_eq!(a.distance(a), 0.0);
    }

    #[test]
    fn arc_membership_wraps() {
        let arc = Arc::new(0.9, 0.2);
        assert!(arc.contains(CirclePoint::new(0.95)));
        assert!(arc.contains(CirclePoint::new(0.05)));
        assert!(!arc.contains(CirclePoint::new(0.5)));
        assert!(arc.contains(arc.start));
        assert!(!arc.contains(arc.end()));
    }

    #[test]
    fn arc_depth() {
        let arc = Arc::new(0.0, 0.4);
        assert!((arc.depth_of(CirclePoint::new(0.2)) - 0.2).abs() < 1e-15);
        assert!((arc.depth_of(CirclePoint::new(0.1)) - 0.1).abs() < 1e-15);
        assert_eq!(arc.depth_of(CirclePoint::new(0.7)), 0.0);
    }

    #[test]
    fn union_merges_overlaps() {
        let u = ArcUnion::new(vec![
            Arc::new(0.1, 0.2),
            Arc::new(0.25, 0.2),
            Arc::new(0.6, 0.1),
        ]);
        assert_eq!(u.arcs().len(), 2);
        assert!((u.total_length() - 0.45).abs() < 1e-12);
        assert!(u.contains(CirclePoint::new(0.3)));
        assert!(!u.contains(CirclePoint::new(0.5)));
        assert!(u.is_proper());
    }

    #[test]
    fn union_wraparound_merge() {
        let u = ArcUnion::new(vec![Arc::new(0.9, 0.2), Arc::new(0.05, 0.1)]);
        assert_eq!(u.arcs().len(), 1);
        assert!((u.arcs()[0].start.value() - 0.9).abs() < 1e-12);
        assert!((u.arcs()[0].length - 0.25).abs() < 1e-12);
    }

    #[test]
    fn union_full_circle_detection() {
        let u = ArcUnion::new(vec![Arc::new(0.3, 1.0)]);
        assert!(u.is_full_circle());
        assert!(!u.is_proper());
    }
}
