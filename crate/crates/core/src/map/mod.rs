//! Circle map representations and their evaluation contracts.
//!
//! Every map is backed by a lift `L: R -> R` with `L(x + 1) = L(x) + d`,
//! where `d` is the topological degree of the cover (1 for homeomorphisms).
//! Evaluation reduces mod 1, inversion and inverse branches run lifted
//! bisection on monotone lifts.

pub mod constructions;
pub mod hermite;

use crate::circle::{Arc, CirclePoint};
use crate::rational::Rational;
use hermite::HermiteNode;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bisection tolerance for numeric inversion.
pub const TOL_INV: f64 = 1e-12;
/// Hard cap on bisection steps.
pub const MAX_BISECT: usize = 200;
/// One-sided derivatives further apart than this are flagged.
pub const TOL_DERIV: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("inverse requested on a degree-{0} cover")]
    NonInvertible(u32),
    #[error("ill-formed map: {0}")]
    IllFormedMap(String),
}

/// One piece of a piecewise lift on `[lo, hi]` in lift coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    #[serde(flatten)]
    pub kind: PieceKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PieceKind {
    /// Polynomial with exact rational coefficients, constant term first.
    Poly { coeffs: Vec<Rational> },
    /// Monotone quintic joining `(lo, v_lo, d_lo)` to `(hi, v_hi, d_hi)`.
    Hermite {
        v_lo: f64,
        d_lo: f64,
        v_hi: f64,
        d_hi: f64,
    },
}

impl Piece {
    pub fn poly(lo: f64, hi: f64, coeffs: Vec<Rational>) -> Piece {
        Piece {
            lo,
            hi,
            kind: PieceKind::Poly { coeffs },
        }
    }

    pub fn hermite(lo: f64, hi: f64, v_lo: f64, d_lo: f64, v_hi: f64, d_hi: f64) -> Piece {
        Piece {
            lo,
            hi,
            kind: PieceKind::Hermite {
                v_lo,
                d_lo,
                v_hi,
                d_hi,
            },
        }
    }

    fn value(&self, x: f64) -> f64 {
        match &self.kind {
            PieceKind::Poly { coeffs } => horner(coeffs, x),
            PieceKind::Hermite {
                v_lo,
                d_lo,
                v_hi,
                d_hi,
            } => hermite::eval(self.lo, *v_lo, *d_lo, self.hi, *v_hi, *d_hi, x),
        }
    }

    fn slope(&self, x: f64) -> f64 {
        match &self.kind {
            PieceKind::Poly { coeffs } => horner_deriv(coeffs, x),
            PieceKind::Hermite {
                v_lo,
                d_lo,
                v_hi,
                d_hi,
            } => hermite::deriv(self.lo, *v_lo, *d_lo, self.hi, *v_hi, *d_hi, x),
        }
    }
}

fn horner(coeffs: &[Rational], x: f64) -> f64 {
    let mut acc = 0.0;
    for c in coeffs.iter().rev() {
        acc = acc * x + c.to_f64();
    }
    acc
}

fn horner_deriv(coeffs: &[Rational], x: f64) -> f64 {
    let mut acc = 0.0;
    for (k, c) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * x + k as f64 * c.to_f64();
    }
    acc
}

/// A circle map given by one of the closed family of representations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircleMap {
    Rotation {
        angle: f64,
    },
    PiecewisePoly {
        pieces: Vec<Piece>,
        degree_of_cover: u32,
    },
    HermiteGap {
        nodes: Vec<HermiteNode>,
    },
    Compose {
        maps: Vec<CircleMap>,
    },
    Inverse {
        inner: Box<CircleMap>,
    },
    IdentityOutsideArc {
        inner: Box<CircleMap>,
        support: Arc,
    },
}

impl CircleMap {
    pub fn rotation(angle: f64) -> CircleMap {
        CircleMap::Rotation { angle }
    }

    pub fn identity() -> CircleMap {
        CircleMap::Rotation { angle: 0.0 }
    }

    /// Validating constructor for piecewise-polynomial lifts.
    pub fn piecewise_poly(pieces: Vec<Piece>, degree_of_cover: u32) -> Result<CircleMap, MapError> {
        let m = CircleMap::PiecewisePoly {
            pieces,
            degree_of_cover,
        };
        m.validate()?;
        Ok(m)
    }

    /// Validating constructor for node-based monotone interpolants.
    pub fn hermite_gap(nodes: Vec<HermiteNode>) -> Result<CircleMap, MapError> {
        let m = CircleMap::HermiteGap { nodes };
        m.validate()?;
        Ok(m)
    }

    /// Like `hermite_gap`, but accepts nodes on any window of one period and
    /// re-anchors positions into `[0, 1)` (shifting lift values by integers).
    pub fn hermite_cyclic(nodes: Vec<HermiteNode>) -> Result<CircleMap, MapError> {
        let mut anchored: Vec<HermiteNode> = nodes
            .into_iter()
            .map(|n| {
                let k = n.x.floor();
                HermiteNode::new(n.x - k, n.value - k, n.deriv)
            })
            .collect();
        anchored.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
        anchored.dedup_by(|a, b| (a.x - b.x).abs() < 1e-12);
        CircleMap::hermite_gap(anchored)
    }

    pub fn compose(maps: Vec<CircleMap>) -> CircleMap {
        CircleMap::Compose { maps }
    }

    pub fn inverse(inner: CircleMap) -> Result<CircleMap, MapError> {
        let d = inner.degree_of_cover();
        if d != 1 {
            return Err(MapError::NonInvertible(d));
        }
        Ok(CircleMap::Inverse {
            inner: Box::new(inner),
        })
    }

    pub fn identity_outside_arc(inner: CircleMap, support: Arc) -> Result<CircleMap, MapError> {
        let m = CircleMap::IdentityOutsideArc {
            inner: Box::new(inner),
            support,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn degree_of_cover(&self) -> u32 {
        match self {
            CircleMap::Rotation { .. } | CircleMap::HermiteGap { .. } => 1,
            CircleMap::PiecewisePoly {
                degree_of_cover, ..
            } => *degree_of_cover,
            CircleMap::Compose { maps } => maps.iter().map(|m| m.degree_of_cover()).product(),
            CircleMap::Inverse { .. } | CircleMap::IdentityOutsideArc { .. } => 1,
        }
    }

    /// Lift evaluation at an arbitrary real coordinate.
    pub fn lift(&self, x: f64) -> f64 {
        match self {
            CircleMap::Rotation { angle } => x + angle,
            CircleMap::PiecewisePoly {
                pieces,
                degree_of_cover,
            } => {
                let k = x.floor();
                let u = x - k;
                piecewise_value(pieces, u) + k * *degree_of_cover as f64
            }
            CircleMap::HermiteGap { nodes } => {
                let k = x.floor();
                let u = x - k;
                hermite_gap_value(nodes, u) + k
            }
            CircleMap::Compose { maps } => maps.iter().rev().fold(x, |acc, m| m.lift(acc)),
            CircleMap::Inverse { inner } => invert_lift(inner, x),
            CircleMap::IdentityOutsideArc { inner, support } => {
                let k = x.floor();
                let u = x - k;
                let p = CirclePoint::new(u);
                if support.contains(p) {
                    let t = support.start.offset_to(p) / support.length;
                    let base = inner.lift(0.0);
                    let y_unit = inner.lift(t) - base;
                    u + support.length * (y_unit - t) + k
                } else {
                    x
                }
            }
        }
    }

    /// Apply the map to a circle point.
    pub fn eval(&self, x: CirclePoint) -> CirclePoint {
        match self {
            // inverses get their closed forms instead of lift bisection
            CircleMap::Inverse { inner } => inner
                .eval_inverse(x)
                .expect("inverse spec validated as degree 1"),
            _ => CirclePoint::new(self.lift(x.value())),
        }
    }

    /// Inverse image under a homeomorphism (degree-1 cover).
    pub fn eval_inverse(&self, y: CirclePoint) -> Result<CirclePoint, MapError> {
        let d = self.degree_of_cover();
        if d != 1 {
            return Err(MapError::NonInvertible(d));
        }
        Ok(match self {
            CircleMap::Rotation { angle } => y.translate(-angle),
            CircleMap::Inverse { inner } => inner.eval(y),
            CircleMap::Compose { maps } => {
                let mut p = y;
                for m in maps {
                    p = m.eval_inverse(p)?;
                }
                p
            }
            _ => CirclePoint::new(invert_lift(self, y.value())),
        })
    }

    /// Right-hand derivative at `x` (chain rule through compositions).
    pub fn derivative(&self, x: CirclePoint) -> f64 {
        match self {
            CircleMap::Rotation { .. } => 1.0,
            CircleMap::PiecewisePoly { pieces, .. } => {
                let u = x.value();
                let p = piece_at(pieces, u);
                p.slope(u)
            }
            CircleMap::HermiteGap { nodes } => hermite_gap_slope(nodes, x.value()),
            CircleMap::Compose { maps } => {
                let mut d = 1.0;
                let mut p = x;
                for m in maps.iter().rev() {
                    d *= m.derivative(p);
                    p = m.eval(p);
                }
                d
            }
            CircleMap::Inverse { inner } => {
                let z = self.eval(x); // z = inner^{-1}(x)
                1.0 / inner.derivative(z)
            }
            CircleMap::IdentityOutsideArc { inner, support } => {
                if support.contains(x) {
                    let t = support.start.offset_to(x) / support.length;
                    inner.derivative(CirclePoint::new(t))
                } else {
                    1.0
                }
            }
        }
    }

    /// Derivative plus a flag when `x` sits at a breakpoint where the
    /// one-sided derivatives disagree beyond `TOL_DERIV`.
    pub fn derivative_sample(&self, x: CirclePoint) -> DerivSample {
        let right = self.derivative(x);
        let left = self.derivative(CirclePoint::new(x.value() - 1e-9));
        let jump = (right - left).abs();
        DerivSample {
            value: right,
            one_sided_jump: if jump > TOL_DERIV { Some(jump) } else { None },
        }
    }

    /// All `d` preimages of `y` under a degree-`d` cover, sorted ascending.
    pub fn inverse_branches(&self, y: CirclePoint) -> Result<Vec<CirclePoint>, MapError> {
        let d = self.degree_of_cover();
        let base = self.lift(0.0);
        let y = y.value();
        // exactly d representatives y + j fall inside [base, base + d)
        let j0 = (base - y).ceil() as i64;
        let mut out = Vec::with_capacity(d as usize);
        for j in j0..j0 + d as i64 {
            let target = y + j as f64;
            if target < base - 1e-9 || target >= base + d as f64 + 1e-9 {
                return Err(MapError::IllFormedMap(format!(
                    "lift window [{base}, {}) missed target {target}",
                    base + d as f64
                )));
            }
            let x = bisect_lift(self, target, 0.0, 1.0)?;
            out.push(CirclePoint::new(x));
        }
        out.sort_by(|a, b| a.value().partial_cmp(&b.value()).unwrap());
        Ok(out)
    }

    /// Largest sampled derivative magnitude over an arc.
    pub fn max_derivative_on_arc(&self, arc: &Arc, samples: usize) -> f64 {
        let mut sup: f64 = 0.0;
        for i in 0..samples {
            let x = arc
                .start
                .translate(arc.length * (i as f64 + 0.5) / samples as f64);
            sup = sup.max(self.derivative(x).abs());
        }
        sup
    }

    /// Image of an arc under an orientation-preserving homeomorphism.
    pub fn map_arc(&self, arc: &Arc) -> Result<Arc, MapError> {
        if self.degree_of_cover() != 1 {
            return Err(MapError::NonInvertible(self.degree_of_cover()));
        }
        if arc.is_full_circle() {
            return Ok(*arc);
        }
        let lo = arc.start.value();
        let img_lo = self.lift(lo);
        let img_hi = self.lift(lo + arc.length);
        // strong contractions can shrink tiny arcs below float resolution
        let len = (img_hi - img_lo).clamp(f64::MIN_POSITIVE, 1.0);
        Ok(Arc::new(CirclePoint::new(img_lo), len))
    }

    /// Structural and monotonicity checks; loaders must call this.
    pub fn validate(&self) -> Result<(), MapError> {
        match self {
            CircleMap::Rotation { angle } => {
                if !angle.is_finite() {
                    return Err(MapError::IllFormedMap("non-finite rotation angle".into()));
                }
                Ok(())
            }
            CircleMap::PiecewisePoly {
                pieces,
                degree_of_cover,
            } => validate_pieces(pieces, *degree_of_cover),
            CircleMap::HermiteGap { nodes } => validate_nodes(nodes),
            CircleMap::Compose { maps } => {
                if maps.is_empty() {
                    return Err(MapError::IllFormedMap("empty composition".into()));
                }
                maps.iter().try_for_each(|m| m.validate())
            }
            CircleMap::Inverse { inner } => {
                inner.validate()?;
                let d = inner.degree_of_cover();
                if d != 1 {
                    return Err(MapError::NonInvertible(d));
                }
                Ok(())
            }
            CircleMap::IdentityOutsideArc { inner, support } => {
                inner.validate()?;
                if inner.degree_of_cover() != 1 {
                    return Err(MapError::IllFormedMap(
                        "identity-outside-arc inner map must have degree 1".into(),
                    ));
                }
                let fix = inner.lift(0.0);
                if (fix - fix.round()).abs() > 1e-9 {
                    return Err(MapError::IllFormedMap(
                        "identity-outside-arc inner map must fix 0".into(),
                    ));
                }
                if support.is_full_circle() {
                    return Err(MapError::IllFormedMap(
                        "identity-outside-arc support must be a proper arc".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Derivative value with an optional one-sided-jump flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivSample {
    pub value: f64,
    pub one_sided_jump: Option<f64>,
}

fn piece_at(pieces: &[Piece], u: f64) -> &Piece {
    let idx = pieces.partition_point(|p| p.hi <= u);
    pieces.get(idx).unwrap_or_else(|| pieces.last().unwrap())
}

fn piecewise_value(pieces: &[Piece], u: f64) -> f64 {
    piece_at(pieces, u).value(u)
}

fn hermite_nodes_piece(nodes: &[HermiteNode], u: f64) -> (HermiteNode, HermiteNode) {
    // wraparound piece runs from the last node (shifted down) to the first
    if u < nodes[0].x {
        let last = *nodes.last().unwrap();
        let wrapped = HermiteNode::new(last.x - 1.0, last.value - 1.0, last.deriv);
        return (wrapped, nodes[0]);
    }
    let idx = nodes.partition_point(|n| n.x <= u);
    if idx == nodes.len() {
        let first = nodes[0];
        let ahead = HermiteNode::new(first.x + 1.0, first.value + 1.0, first.deriv);
        (*nodes.last().unwrap(), ahead)
    } else {
        (nodes[idx - 1], nodes[idx])
    }
}

fn hermite_gap_value(nodes: &[HermiteNode], u: f64) -> f64 {
    let (a, b) = hermite_nodes_piece(nodes, u);
    hermite::eval(a.x, a.value, a.deriv, b.x, b.value, b.deriv, u)
}

fn hermite_gap_slope(nodes: &[HermiteNode], u: f64) -> f64 {
    let (a, b) = hermite_nodes_piece(nodes, u);
    hermite::deriv(a.x, a.value, a.deriv, b.x, b.value, b.deriv, u)
}

/// Solve `inner.lift(x) = y` for the degree-1 lift of `inner`.
fn invert_lift(inner: &CircleMap, y: f64) -> f64 {
    let base = inner.lift(0.0);
    // the solution lies within 1 of y - base
    let lo = y - base - 1.0;
    let hi = y - base + 1.0;
    bisect_lift(inner, y, lo, hi).expect("validated monotone lift must bracket its inverse")
}

/// Solve `map.lift(x) = target` on a bracketing interval: Newton steps with
/// a maintained bisection bracket as safeguard.
fn bisect_lift(map: &CircleMap, target: f64, mut lo: f64, mut hi: f64) -> Result<f64, MapError> {
    let flo = map.lift(lo) - target;
    let fhi = map.lift(hi) - target;
    if flo > 1e-9 || fhi < -1e-9 {
        return Err(MapError::IllFormedMap(format!(
            "bisection bracket [{lo}, {hi}] does not straddle target {target}"
        )));
    }
    if flo >= 0.0 {
        return Ok(lo);
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECT {
        if hi - lo < TOL_INV {
            return Ok(0.5 * (lo + hi));
        }
        let fx = map.lift(x) - target;
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dx = map.derivative(CirclePoint::new(x));
        let newton = x - fx / dx;
        // accept the Newton step only while it stays inside the bracket
        x = if dx.is_finite() && dx > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(0.5 * (lo + hi))
}

fn validate_pieces(pieces: &[Piece], degree: u32) -> Result<(), MapError> {
    if pieces.is_empty() {
        return Err(MapError::IllFormedMap(
            "piecewise map with no pieces".into(),
        ));
    }
    if pieces[0].lo.abs() > 1e-9 || (pieces.last().unwrap().hi - 1.0).abs() > 1e-9 {
        return Err(MapError::IllFormedMap(
            "pieces must cover the fundamental interval [0, 1]".into(),
        ));
    }
    for w in pieces.windows(2) {
        if (w[0].hi - w[1].lo).abs() > 1e-9 {
            return Err(MapError::IllFormedMap(format!(
                "gap between pieces at {} vs {}",
                w[0].hi, w[1].lo
            )));
        }
        let left = w[0].value(w[0].hi);
        let right = w[1].value(w[1].lo);
        if (left - right).abs() > 1e-9 {
            return Err(MapError::IllFormedMap(format!(
                "discontinuity at breakpoint {}: {} vs {}",
                w[0].hi, left, right
            )));
        }
    }
    let l0 = pieces[0].value(pieces[0].lo);
    let l1 = pieces.last().unwrap().value(1.0);
    if (l1 - l0 - degree as f64).abs() > 1e-9 {
        return Err(MapError::IllFormedMap(format!(
            "lift periodicity violated: lift(1) - lift(0) = {} but degree is {degree}",
            l1 - l0
        )));
    }
    // strictly increasing lift, sampled per piece
    for p in pieces {
        let steps = 200;
        for i in 0..=steps {
            let x = p.lo + (p.hi - p.lo) * i as f64 / steps as f64;
            if p.slope(x) <= 0.0 {
                return Err(MapError::IllFormedMap(format!(
                    "non-increasing lift at x = {x} (slope {})",
                    p.slope(x)
                )));
            }
        }
    }
    Ok(())
}

fn validate_nodes(nodes: &[HermiteNode]) -> Result<(), MapError> {
    if nodes.is_empty() {
        return Err(MapError::IllFormedMap("hermite map with no nodes".into()));
    }
    for n in nodes {
        if !(0.0..1.0).contains(&n.x) && nodes.len() > 1 {
            // single-node maps are translations of the identity; multi-node
            // specs keep positions in the fundamental domain
            return Err(MapError::IllFormedMap(format!(
                "node position {} outside [0, 1)",
                n.x
            )));
        }
    }
    for w in nodes.windows(2) {
        if w[1].x <= w[0].x || w[1].value <= w[0].value {
            return Err(MapError::IllFormedMap(
                "hermite nodes must be strictly increasing in x and value".into(),
            ));
        }
    }
    let first = nodes[0];
    let last = *nodes.last().unwrap();
    if last.value - first.value >= 1.0 {
        return Err(MapError::IllFormedMap(
            "hermite node values span a full period".into(),
        ));
    }
    // each quintic piece, including the wraparound, must be increasing
    let mut check = nodes.to_vec();
    check.push(HermiteNode::new(
        first.x + 1.0,
        first.value + 1.0,
        first.deriv,
    ));
    for w in check.windows(2) {
        if !hermite::piece_is_increasing(
            w[0].x, w[0].value, w[0].deriv, w[1].x, w[1].value, w[1].deriv, 1000,
        ) {
            return Err(MapError::IllFormedMap(format!(
                "hermite piece [{}, {}] is not monotone",
                w[0].x, w[1].x
            )));
        }
    }
    Ok(())
}
