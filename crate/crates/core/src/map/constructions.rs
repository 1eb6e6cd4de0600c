//! Compiled-in constructors for the explicit maps used throughout the crate:
//! the degree-2 cover with its slope-3 plateau pieces, the pair of gap maps
//! with a central blending interval, the expansion `h` of the Cantor set, and
//! Hermite-built north-south diffeomorphisms.

use super::hermite::{chain_fill, HermiteNode};
use super::{CircleMap, Piece};
use crate::circle::Arc;
use crate::rational::rat;

/// Degree-2 cover of the circle: cubic pieces on `[0, 1/4]` and `[1/2, 1]`,
/// slope-3 affine pieces on `[1/4, 1/3]` and `[5/12, 1/2]`, and a monotone
/// quintic filling the gap `[1/3, 5/12]` so the lift rises by exactly 2.
pub fn degree_two_cover() -> CircleMap {
    let pieces = vec![
        // x - 8x^2 + 32x^3
        Piece::poly(
            0.0,
            0.25,
            vec![rat(0, 1), rat(1, 1), rat(-8, 1), rat(32, 1)],
        ),
        // 3(x - 1/4) + 1/4
        Piece::poly(0.25, 1.0 / 3.0, vec![rat(-1, 2), rat(3, 1)]),
        // gap fill: value 1/2 slope 3 at 1/3, value 5/4 slope 3 at 5/12
        Piece::hermite(1.0 / 3.0, 5.0 / 12.0, 0.5, 3.0, 1.25, 3.0),
        // 3(x - 1/2) + 1/2, lifted by one period
        Piece::poly(5.0 / 12.0, 0.5, vec![rat(0, 1), rat(3, 1)]),
        // 8x^3 - 20x^2 + 17x - 4, lifted by one period
        Piece::poly(
            0.5,
            1.0,
            vec![rat(-3, 1), rat(17, 1), rat(-20, 1), rat(8, 1)],
        ),
    ];
    CircleMap::piecewise_poly(pieces, 2).expect("compiled-in cover is well formed")
}

/// The two affine inverse branches of `degree_two_cover` on `[1/4, 1/2]`, extended
/// to circle homeomorphisms by a single monotone piece on the complement.
/// On `[1/4, 1/2]` they are exactly `y/3 + 1/6` and `y/3 + 1/3`.
pub fn cover_branch_contractions() -> (CircleMap, CircleMap) {
    let lower = CircleMap::hermite_gap(vec![
        HermiteNode::new(0.25, 0.25, 1.0 / 3.0),
        HermiteNode::new(0.5, 1.0 / 3.0, 1.0 / 3.0),
    ])
    .expect("lower branch extension is monotone");
    let upper = CircleMap::hermite_gap(vec![
        HermiteNode::new(0.25, 5.0 / 12.0, 1.0 / 3.0),
        HermiteNode::new(0.5, 0.5, 1.0 / 3.0),
    ])
    .expect("upper branch extension is monotone");
    (lower, upper)
}

/// Unit-coordinate gap maps `f` and `g`. Both fix 0 and 1, are tangent to
/// slope-(2/3) affine pieces on the middle third, and join by cubics.
pub fn gap_blending_pair() -> (CircleMap, CircleMap) {
    let third = 1.0 / 3.0;
    let f = CircleMap::piecewise_poly(
        vec![
            // -3x^3 + x^2 + x
            Piece::poly(
                0.0,
                third,
                vec![rat(0, 1), rat(1, 1), rat(1, 1), rat(-3, 1)],
            ),
            // (2/3)(x - 1/3) + 1/3
            Piece::poly(third, 2.0 * third, vec![rat(1, 9), rat(2, 3)]),
            // -9x^3 + 23x^2 - 18x + 5
            Piece::poly(
                2.0 * third,
                1.0,
                vec![rat(5, 1), rat(-18, 1), rat(23, 1), rat(-9, 1)],
            ),
        ],
        1,
    )
    .expect("gap map f is well formed");
    let g = CircleMap::piecewise_poly(
        vec![
            // x + 4x^2 - 9x^3
            Piece::poly(
                0.0,
                third,
                vec![rat(0, 1), rat(1, 1), rat(4, 1), rat(-9, 1)],
            ),
            // (2/3)(x - 2/3) + 2/3
            Piece::poly(third, 2.0 * third, vec![rat(2, 9), rat(2, 3)]),
            // -3x^3 + 8x^2 - 6x + 2
            Piece::poly(
                2.0 * third,
                1.0,
                vec![rat(2, 1), rat(-6, 1), rat(8, 1), rat(-3, 1)],
            ),
        ],
        1,
    )
    .expect("gap map g is well formed");
    (f, g)
}

/// The designated gap on which the pair of gap maps acts: the first-generation
/// middle gap `(1/3, 5/12)` of the invariant Cantor set.
pub fn standard_gap() -> Arc {
    Arc::from_endpoints(1.0 / 3.0, 5.0 / 12.0)
}

/// `gap_blending_pair` transported onto a gap arc, identity elsewhere.
pub fn gap_blending_pair_on(gap: Arc) -> (CircleMap, CircleMap) {
    let (f, g) = gap_blending_pair();
    (
        CircleMap::identity_outside_arc(f, gap).expect("gap map f wraps"),
        CircleMap::identity_outside_arc(g, gap).expect("gap map g wraps"),
    )
}

/// The homeomorphism `h`: `3(x - 1/4) + 1/4` on `[1/4, 1/2]`, closed up by a
/// monotone interpolant over the complementary arc.
pub fn cantor_h() -> CircleMap {
    let anchors = [
        HermiteNode::new(0.25, 0.25, 3.0),
        HermiteNode::new(0.5, 1.0, 3.0),
        // interior junction pinned at x = 1 so no piece spans the seam
        HermiteNode::new(1.0, 7.0 / 6.0, 1.0 / 3.0),
        HermiteNode::new(1.25, 1.25, 3.0),
    ];
    CircleMap::hermite_cyclic(chain_fill(&anchors)).expect("h closes up monotonically")
}

/// North-south circle diffeomorphism fixing `attractor` and `repeller` with
/// multipliers `contraction` and `1/contraction`.
pub fn north_south(attractor: f64, repeller: f64, contraction: f64) -> CircleMap {
    assert!(
        contraction > 0.0 && contraction < 1.0,
        "contraction multiplier must lie in (0, 1), got {contraction}"
    );
    let a = attractor.rem_euclid(1.0);
    let r = a + (repeller - attractor).rem_euclid(1.0);
    assert!(r > a && r < a + 1.0, "attractor and repeller must differ");
    let anchors = [
        HermiteNode::new(a, a, contraction),
        HermiteNode::new(r, r, 1.0 / contraction),
        HermiteNode::new(a + 1.0, a + 1.0, contraction),
    ];
    CircleMap::hermite_cyclic(chain_fill(&anchors)).expect("north-south map is monotone")
}

/// Smooth near-identity map displacing four equispaced anchor points by the
/// given amounts. Sup-norm distance to the identity is `max |delta|`; the
/// derivative stays within `7.5 * max |delta - delta'|` of 1.
pub fn displacement_bump(phase: f64, deltas: [f64; 4]) -> CircleMap {
    let nodes: Vec<HermiteNode> = deltas
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let x = phase + i as f64 / 4.0;
            HermiteNode::new(x, x + d, 1.0)
        })
        .collect();
    CircleMap::hermite_cyclic(nodes).expect("bump displacements too large for monotonicity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::CirclePoint;
    use crate::map::TOL_INV;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn cover_junctions_and_periodicity() {
        let h = degree_two_cover();
        // junction continuity to 1e-12
        for bp in [0.25, 1.0 / 3.0, 5.0 / 12.0, 0.5] {
            let left = h.lift(bp - 1e-13);
            let right = h.lift(bp + 1e-13);
            assert!((left - right).abs() < 1e-12, "junction at {bp}");
        }
        // lift rises by the degree over one period
        assert_close(h.lift(1.0), h.lift(0.0) + 2.0, 1e-12);
        // fixed point and slope data from the plateau pieces
        assert_close(h.lift(0.25), 0.25, 1e-15);
        assert_close(h.derivative(CirclePoint::new(0.3)), 3.0, 1e-12);
        assert_close(h.lift(5.0 / 12.0), 1.25, 1e-12);
    }

    #[test]
    fn cover_lift_strictly_increasing_on_grid() {
        let h = degree_two_cover();
        let mut prev = h.lift(0.0);
        for i in 1..=10_000 {
            let x = i as f64 / 10_000.0;
            let v = h.lift(x);
            assert!(v > prev, "lift not increasing at {x}");
            prev = v;
        }
    }

    #[test]
    fn cover_inverse_branches_match_affine_inverses() {
        let h = degree_two_cover();
        let pre = h.inverse_branches(CirclePoint::new(0.3)).unwrap();
        assert_eq!(pre.len(), 2);
        assert_close(pre[0].value(), 0.3 / 3.0 + 1.0 / 6.0, 1e-10);
        assert_close(pre[1].value(), 0.3 / 3.0 + 1.0 / 3.0, 1e-10);
        for p in pre {
            assert!(h.eval(p).distance(CirclePoint::new(0.3)) < 10.0 * TOL_INV);
        }
        // endpoints of the slope-3 pieces both map to 1/4
        let pre = h.inverse_branches(CirclePoint::new(0.25)).unwrap();
        assert_close(pre[0].value(), 0.25, 1e-10);
        assert_close(pre[1].value(), 5.0 / 12.0, 1e-10);
    }

    #[test]
    fn gap_pieces_agree_with_their_formulas() {
        let (f, g) = gap_blending_pair();
        // continuity of pieces at the junctions
        assert_close(f.lift(1.0 / 3.0), 1.0 / 3.0, 1e-12);
        assert_close(g.lift(2.0 / 3.0), 2.0 / 3.0, 1e-12);
        // middle affine piece of f
        assert_close(f.lift(0.5), 2.0 * 0.5 / 3.0 + 1.0 / 9.0, 1e-15);
        // both fix the endpoints of the unit interval
        assert_close(f.lift(0.0), 0.0, 1e-15);
        assert_close(f.lift(1.0), 1.0, 1e-12);
        assert_close(g.lift(0.0), 0.0, 1e-15);
        assert_close(g.lift(1.0), 1.0, 1e-12);
        // slope 2/3 on the middle pieces
        assert_close(f.derivative(CirclePoint::new(0.5)), 2.0 / 3.0, 1e-15);
        assert_close(g.derivative(CirclePoint::new(0.5)), 2.0 / 3.0, 1e-15);
    }

    #[test]
    fn gap_lifts_strictly_increasing() {
        let (f, g) = gap_blending_pair();
        for m in [f, g] {
            let mut prev = m.lift(0.0);
            for i in 1..=10_000 {
                let x = i as f64 / 10_000.0;
                let v = m.lift(x);
                assert!(v > prev, "lift not increasing at {x}");
                prev = v;
            }
        }
    }

    #[test]
    fn branch_contractions_realize_the_affine_branches() {
        let (lo, hi) = cover_branch_contractions();
        for i in 0..=64 {
            let y = 0.25 + 0.25 * i as f64 / 64.0;
            assert_close(
                lo.eval(CirclePoint::new(y)).value(),
                y / 3.0 + 1.0 / 6.0,
                1e-13,
            );
            assert_close(
                hi.eval(CirclePoint::new(y)).value(),
                y / 3.0 + 1.0 / 3.0,
                1e-13,
            );
        }
    }

    #[test]
    fn h_expands_the_base_interval() {
        let h = cantor_h();
        assert_close(h.eval(CirclePoint::new(0.25)).value(), 0.25, 1e-12);
        assert_close(h.eval(CirclePoint::new(1.0 / 3.0)).value(), 0.5, 1e-12);
        assert_close(h.derivative(CirclePoint::new(0.3)), 3.0, 1e-9);
        // h(1/2) = 1 = 0 on the circle
        assert!(
            h.eval(CirclePoint::new(0.5))
                .distance(CirclePoint::new(0.0))
                < 1e-12
        );
    }

    #[test]
    fn north_south_dynamics() {
        let f = north_south(0.25, 0.75, 0.5);
        assert!(
            f.eval(CirclePoint::new(0.25))
                .distance(CirclePoint::new(0.25))
                < 1e-12
        );
        assert!(
            f.eval(CirclePoint::new(0.75))
                .distance(CirclePoint::new(0.75))
                < 1e-12
        );
        assert_close(f.derivative(CirclePoint::new(0.25)), 0.5, 1e-9);
        assert_close(f.derivative(CirclePoint::new(0.75)), 2.0, 1e-9);
        // every other orbit converges to the attractor
        for start in [0.0, 0.1, 0.4, 0.6, 0.9] {
            let mut x = CirclePoint::new(start);
            for _ in 0..400 {
                x = f.eval(x);
            }
            assert!(
                x.distance(CirclePoint::new(0.25)) < 1e-6,
                "orbit of {start} stalled at {x:?}"
            );
        }
    }

    #[test]
    fn bump_stays_close_to_identity() {
        let m = displacement_bump(0.13, [4e-4, -3e-4, 2e-4, -5e-4]);
        let mut sup = 0.0f64;
        let mut dsup = 0.0f64;
        for i in 0..2000 {
            let x = CirclePoint::new(i as f64 / 2000.0);
            sup = sup.max(m.eval(x).distance(x));
            dsup = dsup.max((m.derivative(x) - 1.0).abs());
        }
        assert!(sup <= 5e-4 + 1e-12, "sup displacement {sup}");
        assert!(dsup <= 7.5e-3, "derivative distortion {dsup}");
    }
}
