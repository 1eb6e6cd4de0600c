//! Quintic Hermite pieces for monotone gap filling.
//!
//! A piece interpolates value and first derivative at both endpoints with the
//! second derivative pinned to zero, so adjacent pieces join C1. Monotonicity
//! is not automatic; constructors verify it on a grid and `monotone_fill`
//! inserts intermediate nodes so every emitted piece passes.

use serde::{Deserialize, Serialize};

/// Interpolation node: position `x` (in lift coordinates), lift value and slope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteNode {
    pub x: f64,
    pub value: f64,
    pub deriv: f64,
}

impl HermiteNode {
    pub fn new(x: f64, value: f64, deriv: f64) -> HermiteNode {
        HermiteNode { x, value, deriv }
    }
}

/// Evaluate the quintic on `[x0, x1]` with data `(v0, d0)`, `(v1, d1)` at `x`.
pub fn eval(x0: f64, v0: f64, d0: f64, x1: f64, v1: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let k0 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let k1 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    v0 * h0 + v1 * h1 + h * (d0 * k0 + d1 * k1)
}

/// Derivative of the quintic at `x`.
pub fn deriv(x0: f64, v0: f64, d0: f64, x1: f64, v1: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let bump = 30.0 * t2 * (1.0 - t) * (1.0 - t);
    let k0d = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let k1d = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    (v1 - v0) / h * bump + d0 * k0d + d1 * k1d
}

/// Grid check of strict monotonicity of one piece.
pub fn piece_is_increasing(
    x0: f64,
    v0: f64,
    d0: f64,
    x1: f64,
    v1: f64,
    d1: f64,
    grid: usize,
) -> bool {
    if v1 <= v0 || x1 <= x0 {
        return false;
    }
    (0..=grid).all(|i| {
        let x = x0 + (x1 - x0) * i as f64 / grid as f64;
        deriv(x0, v0, d0, x1, v1, d1, x) > 0.0
    })
}

// A single quintic with zero end curvature stays increasing when neither end
// slope exceeds the mean slope by more than this factor.
const SAFE_SLOPE_RATIO: f64 = 1.8;

/// Nodes (including both endpoints) of a monotone interpolant from
/// `(x0, v0, d0)` to `(x1, v1, d1)`. When the endpoint slopes are too far
/// from the mean slope for a single piece, short boundary stubs absorb them.
pub fn monotone_fill(x0: f64, v0: f64, d0: f64, x1: f64, v1: f64, d1: f64) -> Vec<HermiteNode> {
    let w = x1 - x0;
    let r = v1 - v0;
    assert!(w > 0.0 && r > 0.0, "fill requires increasing data");
    assert!(d0 > 0.0 && d1 > 0.0, "fill requires positive end slopes");
    let mean = r / w;
    if d0 <= SAFE_SLOPE_RATIO * mean && d1 <= SAFE_SLOPE_RATIO * mean {
        return vec![HermiteNode::new(x0, v0, d0), HermiteNode::new(x1, v1, d1)];
    }
    // stub mean slopes chosen so the endpoint slope is within the safe ratio
    let ms_a = 0.6 * d0.max(mean);
    let ms_b = 0.6 * d1.max(mean);
    let wa = (0.25 * w).min(0.3 * r / ms_a);
    let wb = (0.25 * w).min(0.3 * r / ms_b);
    let ra = ms_a * wa;
    let rb = ms_b * wb;
    let mid_mean = (r - ra - rb) / (w - wa - wb);
    let s = mid_mean.min(ms_a).min(ms_b);
    vec![
        HermiteNode::new(x0, v0, d0),
        HermiteNode::new(x0 + wa, v0 + ra, s),
        HermiteNode::new(x1 - wb, v1 - rb, s),
        HermiteNode::new(x1, v1, d1),
    ]
}

/// Run `monotone_fill` between every consecutive pair of anchor nodes and
/// splice the results into one node list.
pub fn chain_fill(anchors: &[HermiteNode]) -> Vec<HermiteNode> {
    assert!(anchors.len() >= 2, "chain fill needs at least two anchors");
    let mut out: Vec<HermiteNode> = vec![anchors[0]];
    for pair in anchors.windows(2) {
        let seg = monotone_fill(
            pair[0].x,
            pair[0].value,
            pair[0].deriv,
            pair[1].x,
            pair[1].value,
            pair[1].deriv,
        );
        out.extend_from_slice(&seg[1..]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_endpoint_data() {
        let (x0, v0, d0, x1, v1, d1) = (0.25, 0.5, 3.0, 0.5, 1.25, 3.0);
        assert!((eval(x0, v0, d0, x1, v1, d1, x0) - v0).abs() < 1e-15);
        assert!((eval(x0, v0, d0, x1, v1, d1, x1) - v1).abs() < 1e-15);
        assert!((deriv(x0, v0, d0, x1, v1, d1, x0) - d0).abs() < 1e-12);
        assert!((deriv(x0, v0, d0, x1, v1, d1, x1) - d1).abs() < 1e-12);
    }

    #[test]
    fn reproduces_affine_data_exactly() {
        // matching slopes equal to the mean collapse the quintic to the line
        for i in 0..=100 {
            let x = 0.25 + 0.25 * i as f64 / 100.0;
            let line = x / 3.0 + 1.0 / 6.0;
            let y = eval(0.25, 0.25, 1.0 / 3.0, 0.5, 1.0 / 3.0, 1.0 / 3.0, x);
            assert!((y - line).abs() < 1e-15, "x={x} y={y} line={line}");
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let (x0, v0, d0, x1, v1, d1) = (0.0, 0.0, 0.4, 1.0, 1.0, 2.1);
        for i in 1..50 {
            let x = i as f64 / 50.0;
            let h = 1e-6;
            let fd = (eval(x0, v0, d0, x1, v1, d1, x + h) - eval(x0, v0, d0, x1, v1, d1, x - h))
                / (2.0 * h);
            let an = deriv(x0, v0, d0, x1, v1, d1, x);
            assert!((fd - an).abs() < 1e-6, "x={x} fd={fd} an={an}");
        }
    }

    #[test]
    fn cover_gap_piece_is_monotone() {
        // the gap of the degree-2 cover: slope 3 at both ends, mean slope 9
        assert!(piece_is_increasing(
            1.0 / 3.0,
            0.5,
            3.0,
            5.0 / 12.0,
            1.25,
            3.0,
            1000
        ));
    }

    #[test]
    fn fill_handles_steep_ends_over_shallow_rise() {
        // slope 3 at both ends but total mean slope only 1/3
        let nodes = monotone_fill(0.5, 1.0, 3.0, 1.25, 1.25, 3.0);
        assert!(nodes.len() >= 4);
        for pair in nodes.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            assert!(
                piece_is_increasing(a.x, a.value, a.deriv, b.x, b.value, b.deriv, 1000),
                "piece {a:?} -> {b:?} not monotone"
            );
        }
    }

    #[test]
    fn fill_trivial_case_is_single_piece() {
        let nodes = monotone_fill(0.0, 0.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(nodes.len(), 2);
    }
}
