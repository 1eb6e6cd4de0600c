//! The symbolic layer: finite windows standing in for bi-infinite symbol
//! sequences, cylinders, the one-step skew-product `(w, x) -> (shift w,
//! f_{w_0}(x))`, fiber projections of strong stable/unstable leaves, and the
//! constructive leaf-density search.

use crate::circle::{Arc, CirclePoint};
use crate::hyperspace::{AttractorReport, AttractorVerdict, IfsSystem, PointCloud};
use crate::map::MapError;
use crate::semigroup::{eval_word, SemiError, Word};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone)]
pub enum SkewError {
    #[error("negative-time step needs an invertible system")]
    NonInvertible,
    #[error("beta search exhausted after scanning {candidates} candidates")]
    SearchExhausted { candidates: usize },
    #[error("attractor report lacks a usable horizon: {0}")]
    NoHorizon(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Semi(#[from] SemiError),
}

/// How a finite window extends to a bi-infinite sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailRule {
    PeriodicFromLastBlock,
    ConstantSymbol(u8),
}

/// Finitely many stored symbols around the origin plus a tail rule; the
/// shift acts by moving an offset, so windows are cheap to step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolWindow {
    past: Vec<u8>,   // positions -past.len()..=-1, listed by position
    future: Vec<u8>, // positions 0..future.len()
    tail: TailRule,
    offset: i64,
}

impl SymbolWindow {
    pub fn new(past: Vec<u8>, future: Vec<u8>, tail: TailRule) -> SymbolWindow {
        if past.is_empty() && future.is_empty() {
            assert!(
                matches!(tail, TailRule::ConstantSymbol(_)),
                "empty window needs a constant tail rule"
            );
        }
        SymbolWindow {
            past,
            future,
            tail,
            offset: 0,
        }
    }

    /// The all-`s` sequence.
    pub fn constant(s: u8) -> SymbolWindow {
        SymbolWindow::new(Vec::new(), Vec::new(), TailRule::ConstantSymbol(s))
    }

    /// Symbol at any index, extending by the tail rule on demand.
    pub fn symbol_at(&self, i: i64) -> u8 {
        let j = i + self.offset;
        if j >= 0 {
            let idx = j as usize;
            if idx < self.future.len() {
                return self.future[idx];
            }
            match self.tail {
                TailRule::ConstantSymbol(s) => s,
                TailRule::PeriodicFromLastBlock => {
                    if !self.future.is_empty() {
                        self.future[idx % self.future.len()]
                    } else if !self.past.is_empty() {
                        self.past[idx % self.past.len()]
                    } else {
                        unreachable!("validated at construction")
                    }
                }
            }
        } else {
            let back = (-j) as usize; // 1-based distance into the past
            if back <= self.past.len() {
                return self.past[self.past.len() - back];
            }
            match self.tail {
                TailRule::ConstantSymbol(s) => s,
                TailRule::PeriodicFromLastBlock => {
                    if !self.past.is_empty() {
                        let m = self.past.len();
                        self.past[(m - 1) - ((back - 1) % m)]
                    } else if !self.future.is_empty() {
                        let m = self.future.len();
                        self.future[(m - 1) - ((back - 1) % m)]
                    } else {
                        unreachable!("validated at construction")
                    }
                }
            }
        }
    }

    /// Shifted view: the new symbol at `i` is the old symbol at `i + n`.
    pub fn shifted(&self, n: i64) -> SymbolWindow {
        let mut w = self.clone();
        w.offset += n;
        w
    }

    /// The involuted sequence `w'_i = w_{-i-1}`, materialized exactly out to
    /// `horizon` on both sides (the tail rule approximates beyond).
    pub fn involute(&self, horizon: usize) -> SymbolWindow {
        let future: Vec<u8> = (0..horizon)
            .map(|i| self.symbol_at(-(i as i64) - 1))
            .collect();
        let past: Vec<u8> = (0..horizon)
            .map(|idx| self.symbol_at((horizon - idx - 1) as i64))
            .collect();
        SymbolWindow::new(past, future, self.tail)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CylinderSide {
    TwoSided,
    NegOnly,
    PosOnly,
}

/// A cylinder `[u; v]` constraining finitely many coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cylinder {
    pub neg_word: Vec<u8>, // positions -s..=-1, listed by position
    pub pos_word: Vec<u8>, // positions 0..t
    pub side: CylinderSide,
}

impl Cylinder {
    pub fn two_sided(neg_word: Vec<u8>, pos_word: Vec<u8>) -> Cylinder {
        Cylinder {
            neg_word,
            pos_word,
            side: CylinderSide::TwoSided,
        }
    }

    pub fn matches(&self, w: &SymbolWindow) -> bool {
        let neg_ok = || {
            let s = self.neg_word.len() as i64;
            self.neg_word
                .iter()
                .enumerate()
                .all(|(idx, &u)| w.symbol_at(idx as i64 - s) == u)
        };
        let pos_ok = || {
            self.pos_word
                .iter()
                .enumerate()
                .all(|(idx, &v)| w.symbol_at(idx as i64) == v)
        };
        match self.side {
            CylinderSide::TwoSided => neg_ok() && pos_ok(),
            CylinderSide::NegOnly => neg_ok(),
            CylinderSide::PosOnly => pos_ok(),
        }
    }
}

/// Apply the skew-product `n` times (negative `n` runs the inverse).
pub fn skew_step(
    system: &IfsSystem,
    window: &SymbolWindow,
    x: CirclePoint,
    n: i64,
) -> Result<(SymbolWindow, CirclePoint), SkewError> {
    let mut p = x;
    if n >= 0 {
        for i in 0..n {
            p = system.eval_symbol(window.symbol_at(i), p);
        }
    } else {
        if !system.invertible() {
            return Err(SkewError::NonInvertible);
        }
        for j in 1..=(-n) {
            p = system.eval_symbol_inverse(window.symbol_at(-j), p)?;
        }
    }
    Ok((window.shifted(n), p))
}

/// The fiber point of `Phi^{-n}`: `f_w^{-n}(x)`.
pub fn backward_fiber(
    system: &IfsSystem,
    window: &SymbolWindow,
    x: CirclePoint,
    n: u32,
) -> Result<CirclePoint, SkewError> {
    Ok(skew_step(system, window, x, -(n as i64))?.1)
}

/// One leaf-projection witness: applying `word` to the report's anchor
/// reproduces `point` exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeafWitness {
    pub n: u32,
    pub word: Word,
    pub point: f64,
}

/// Fiber projection of a strong stable or unstable leaf.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeafReport {
    pub window: SymbolWindow,
    pub base_x: f64,
    pub depth: u32,
    /// `f_w^{-depth}(x)` (unstable) or `f_w^{depth}(x)` (stable): the point
    /// every witness word starts from.
    pub anchor: f64,
    pub stable: bool,
    pub fiber_projection: PointCloud,
    pub witnesses: Vec<LeafWitness>,
}

impl LeafReport {
    /// Re-run every witness word from the anchor; exact replay.
    pub fn replay(&self, system: &IfsSystem) -> Result<(), SkewError> {
        // the anchor itself must re-derive from the base point
        let anchor = if self.stable {
            skew_step(
                system,
                &self.window,
                CirclePoint::new(self.base_x),
                self.depth as i64,
            )?
            .1
        } else {
            backward_fiber(
                system,
                &self.window,
                CirclePoint::new(self.base_x),
                self.depth,
            )?
        };
        if anchor.distance(CirclePoint::new(self.anchor)) > 1e-12 {
            return Err(SkewError::Semi(SemiError::ReplayFailed(format!(
                "anchor drifted: {} vs {}",
                anchor.value(),
                self.anchor
            ))));
        }
        for w in &self.witnesses {
            let landed = eval_word(system, &w.word, CirclePoint::new(self.anchor))
                .map_err(SkewError::from)?;
            if landed.distance(CirclePoint::new(w.point)) > 10.0 * crate::map::TOL_INV {
                return Err(SkewError::Semi(SemiError::ReplayFailed(format!(
                    "witness {:?} lands at {} instead of {}",
                    w.word,
                    landed.value(),
                    w.point
                ))));
            }
        }
        Ok(())
    }
}

fn hutchinson_with_words(
    system: &IfsSystem,
    anchor: CirclePoint,
    depth: u32,
    prune_delta: f64,
    backward_symbols: bool,
) -> Result<Vec<(f64, Vec<u8>)>, SkewError> {
    let mut frontier: Vec<(f64, Vec<u8>)> = vec![(anchor.value(), Vec::new())];
    let cells = (1.0 / prune_delta).ceil() as u64 + 1;
    for _ in 0..depth {
        let mut seen = std::collections::HashSet::with_capacity(frontier.len() * system.k());
        let mut next = Vec::with_capacity(frontier.len() * system.k());
        for (p, word) in &frontier {
            for s in 1..=system.k() as u8 {
                let img = if backward_symbols {
                    system.eval_symbol_inverse(s, CirclePoint::new(*p))?.value()
                } else {
                    system.eval_symbol(s, CirclePoint::new(*p)).value()
                };
                let cell = ((img / prune_delta) as u64).min(cells - 1);
                if !seen.insert(cell) {
                    continue;
                }
                let mut w = word.clone();
                w.push(s);
                next.push((img, w));
            }
        }
        frontier = next;
    }
    Ok(frontier)
}

/// Fiber projection of the strong unstable leaf through `(w, x)`:
/// `F^depth` applied to the backward fiber point, with per-point witness
/// words. The nested-union identity makes the deepest level contain every
/// shallower one up to pruning.
pub fn unstable_leaf_projection(
    system: &IfsSystem,
    window: &SymbolWindow,
    x: CirclePoint,
    depth: u32,
    prune_delta: f64,
) -> Result<LeafReport, SkewError> {
    if !system.invertible() {
        return Err(SkewError::NonInvertible);
    }
    let anchor = backward_fiber(system, window, x, depth)?;
    let frontier = hutchinson_with_words(system, anchor, depth, prune_delta, false)?;
    let witnesses: Vec<LeafWitness> = frontier
        .iter()
        .map(|(p, w)| LeafWitness {
            n: depth,
            word: Word::forward(w.clone()),
            point: *p,
        })
        .collect();
    let cloud = if depth == 0 {
        PointCloud::singleton(anchor, prune_delta)
    } else {
        PointCloud::new(frontier.iter().map(|(p, _)| *p), prune_delta)
    };
    Ok(LeafReport {
        window: window.clone(),
        base_x: x.value(),
        depth,
        anchor: anchor.value(),
        stable: false,
        fiber_projection: cloud,
        witnesses,
    })
}

/// Mirror of `unstable_leaf_projection`: inverse family applied to the
/// forward fiber point.
pub fn stable_leaf_projection(
    system: &IfsSystem,
    window: &SymbolWindow,
    x: CirclePoint,
    depth: u32,
    prune_delta: f64,
) -> Result<LeafReport, SkewError> {
    if !system.invertible() {
        return Err(SkewError::NonInvertible);
    }
    let anchor = skew_step(system, window, x, depth as i64)?.1;
    let frontier = hutchinson_with_words(system, anchor, depth, prune_delta, true)?;
    let witnesses: Vec<LeafWitness> = frontier
        .iter()
        .map(|(p, w)| LeafWitness {
            n: depth,
            word: Word::backward(w.clone()),
            point: *p,
        })
        .collect();
    let cloud = if depth == 0 {
        PointCloud::singleton(anchor, prune_delta)
    } else {
        PointCloud::new(frontier.iter().map(|(p, _)| *p), prune_delta)
    };
    Ok(LeafReport {
        window: window.clone(),
        base_x: x.value(),
        depth,
        anchor: anchor.value(),
        stable: true,
        fiber_projection: cloud,
        witnesses,
    })
}

/// Maximum fiber discrepancy between `Phi^{-n}` and the conjugate
/// `(tau lx F^{-1})^n` through the involution, over random trials.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConjugacyReport {
    pub trials: u32,
    pub max_discrepancy: f64,
}

pub fn conjugacy_check(
    system: &IfsSystem,
    trials: u32,
    rng_seed: u64,
) -> Result<ConjugacyReport, SkewError> {
    use rand::{Rng, SeedableRng};
    let inverse = system.inverse_system()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
    let k = system.k() as u8;
    let mut max_disc = 0.0f64;
    for _ in 0..trials {
        let len = 24usize;
        let past: Vec<u8> = (0..len).map(|_| rng.gen_range(1..=k)).collect();
        let future: Vec<u8> = (0..len).map(|_| rng.gen_range(1..=k)).collect();
        let window = SymbolWindow::new(past, future, TailRule::ConstantSymbol(1));
        let x = CirclePoint::new(rng.gen::<f64>());
        let n = rng.gen_range(0..=20i64);
        let (_, phi_fiber) = skew_step(system, &window, x, -n)?;
        let involuted = window.involute(len + n as usize + 1);
        let (_, psi_fiber) = skew_step(&inverse, &involuted, x, n)?;
        max_disc = max_disc.max(phi_fiber.distance(psi_fiber));
    }
    Ok(ConjugacyReport {
        trials,
        max_discrepancy: max_disc,
    })
}

/// Constructive intersection of a strong unstable leaf with `Cylinder x Arc`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeafDensityWitness {
    pub sigma: Vec<u8>,
    pub n: u32,
    pub fiber_point: f64,
}

/// Search a word `beta` of the horizon length such that
/// `f_alpha(f_beta(f_w^{-n}(x)))` lands in the target arc, where `alpha` is
/// the cylinder's negative word and `n = |beta| + |alpha|`. The witness is a
/// point of the leaf inside the target cylinder-times-arc box.
pub fn leaf_density_certify(
    system: &IfsSystem,
    attractor: &AttractorReport,
    window: &SymbolWindow,
    x: CirclePoint,
    target_cyl: &Cylinder,
    target_arc: &Arc,
    probe_seeds: usize,
) -> Result<LeafDensityWitness, SkewError> {
    if attractor.verdict != AttractorVerdict::StrictAttractorEvidence {
        return Err(SkewError::NoHorizon(
            "strict-attractor evidence is a precondition".into(),
        ));
    }
    let alpha = &target_cyl.neg_word;
    let r = alpha.len() as u32;
    let alpha_word = Word::forward(alpha.clone());
    // pull the target arc back through alpha to find the needed density scale
    let lo = crate::semigroup::eval_word_inverse(system, &alpha_word, target_arc.start)?;
    let hi = crate::semigroup::eval_word_inverse(system, &alpha_word, target_arc.end())?;
    let pulled = Arc::new(lo, lo.offset_to(hi).max(f64::MIN_POSITIVE));
    let eps_needed = 0.75 * pulled.length / 2.0;
    let m = horizon_for(system, attractor, eps_needed, probe_seeds)?;
    let n = m + r;
    let y = backward_fiber(system, window, x, n)?;
    // breadth search of beta candidates at the horizon length
    let prune = (pulled.length / 8.0).min(1.0 / 2048.0);
    let frontier = hutchinson_with_words(system, y, m, prune, false)?;
    let mut scanned = 0usize;
    for (p, beta) in &frontier {
        scanned += 1;
        if pulled.contains(CirclePoint::new(*p)) {
            // confirm through the exact alpha application
            let fiber =
                eval_word(system, &alpha_word, CirclePoint::new(*p)).map_err(SkewError::from)?;
            if target_arc.contains(fiber) {
                let mut sigma = beta.clone();
                sigma.extend_from_slice(alpha);
                return Ok(LeafDensityWitness {
                    sigma,
                    n,
                    fiber_point: fiber.value(),
                });
            }
        }
    }
    Err(SkewError::SearchExhausted {
        candidates: scanned,
    })
}

fn horizon_for(
    system: &IfsSystem,
    report: &AttractorReport,
    eps: f64,
    probe_seeds: usize,
) -> Result<u32, SkewError> {
    if eps >= report.epsilon {
        return report
            .horizon_n0
            .ok_or_else(|| SkewError::NoHorizon("report carries no horizon".into()));
    }
    // finer scale than the report certifies: re-probe; fall back to the
    // report's horizon when the re-probe is inconclusive (any witness the
    // search then finds is still replay-exact, only success is no longer
    // guaranteed)
    let seeds = crate::hyperspace::seed_grid(probe_seeds);
    let fresh = crate::hyperspace::strict_attractor_probe(
        system,
        eps,
        &seeds,
        report.budget_n * 2,
        (eps / 4.0).min(report.delta),
    );
    match (fresh.verdict, fresh.horizon_n0) {
        (AttractorVerdict::StrictAttractorEvidence, Some(h)) => Ok(h),
        _ => report
            .horizon_n0
            .ok_or_else(|| SkewError::NoHorizon("report carries no horizon".into())),
    }
}

/// One verified sample of the skew-product transitivity construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkewTransitivitySample {
    pub n: u32,
    pub connecting_word: Word,
    pub base_ok: bool,
    pub fiber_ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkewTransitivityReport {
    pub samples: Vec<SkewTransitivitySample>,
    pub failures: usize,
}

/// For each `((C, D), (U, V))` sample, build `f` from `C`'s positive word
/// and `g` from `D`'s negative word, pull a connecting word `h` from the
/// transitivity certificate with `h(f(U))` meeting `g^{-1}(V)`, and verify
/// on a concrete point that the skew-product moves `C x U` into `D x V`.
pub fn skew_transitivity_check(
    system: &IfsSystem,
    cert: &crate::semigroup::DensityCertificate,
    cylinder_pairs: &[(Cylinder, Cylinder)],
    arc_pairs: &[(Arc, Arc)],
) -> Result<SkewTransitivityReport, SkewError> {
    use crate::semigroup::CertMode;
    let CertMode::Transitivity { source_arcs } = &cert.mode else {
        return Err(SkewError::Semi(SemiError::InvalidInput(
            "skew transitivity needs a transitivity-mode certificate".into(),
        )));
    };
    if !cert.is_complete() {
        return Err(SkewError::Semi(SemiError::InvalidInput(
            "transitivity certificate must be complete".into(),
        )));
    }
    let mut samples = Vec::new();
    let mut failures = 0usize;
    for ((c_cyl, d_cyl), (u_arc, v_arc)) in cylinder_pairs.iter().zip(arc_pairs) {
        let f_word = Word::forward(c_cyl.pos_word.clone());
        let g_word = Word::forward(d_cyl.neg_word.clone());
        let f_u = {
            let lo = eval_word(system, &f_word, u_arc.start)?;
            let hi = eval_word(system, &f_word, u_arc.end())?;
            Arc::new(lo, lo.offset_to(hi).max(f64::MIN_POSITIVE))
        };
        let g_inv_v = {
            let lo = crate::semigroup::eval_word_inverse(system, &g_word, v_arc.start)?;
            let hi = crate::semigroup::eval_word_inverse(system, &g_word, v_arc.end())?;
            Arc::new(lo, lo.offset_to(hi).max(f64::MIN_POSITIVE))
        };
        // a certificate witness whose start sits in f(U) and whose target
        // ball fits inside g^{-1}(V)
        let found = (0..source_arcs.len())
            .flat_map(|ai| (0..cert.centers.len()).map(move |ci| (ai, ci)))
            .find_map(|(ai, ci)| {
                let center = CirclePoint::new(cert.centers[ci]);
                if g_inv_v.depth_of(center) <= cert.ball_radius {
                    return None;
                }
                let w = cert
                    .witnesses
                    .iter()
                    .find(|w| w.seed_index == ai && w.center_index == ci)?;
                f_u.contains(CirclePoint::new(w.start)).then(|| w.clone())
            });
        let Some(witness) = found else {
            failures += 1;
            samples.push(SkewTransitivitySample {
                n: 0,
                connecting_word: Word::identity(),
                base_ok: false,
                fiber_ok: false,
            });
            continue;
        };
        let h_word = witness.word.clone();
        // replay the fiber: u = f^{-1}(start), then f, h, g
        let u =
            crate::semigroup::eval_word_inverse(system, &f_word, CirclePoint::new(witness.start))?;
        let full = f_word.concat(&h_word).concat(&g_word);
        let landed = eval_word(system, &full, u)?;
        let fiber_ok = u_arc.contains_closed(u, 1e-9) && v_arc.contains(landed);
        // base bookkeeping: the concatenated cylinder shifts into D
        let n = full.len() as u32;
        let mut pos = c_cyl.pos_word.clone();
        pos.extend_from_slice(&h_word.symbols);
        pos.extend_from_slice(&d_cyl.neg_word);
        pos.extend_from_slice(&d_cyl.pos_word);
        let a_window = SymbolWindow::new(c_cyl.neg_word.clone(), pos, TailRule::ConstantSymbol(1));
        let base_ok = d_cyl.matches(&a_window.shifted(n as i64));
        if !(base_ok && fiber_ok) {
            failures += 1;
        }
        samples.push(SkewTransitivitySample {
            n,
            connecting_word: h_word,
            base_ok,
            fiber_ok,
        });
    }
    Ok(SkewTransitivityReport { samples, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperspace::{seed_grid, strict_attractor_probe};
    use crate::map::{constructions, CircleMap};
    use crate::semigroup::certify_transitivity;

    fn rotation_ms_pair() -> IfsSystem {
        IfsSystem::new(
            vec![
                CircleMap::rotation(2f64.sqrt() - 1.0),
                constructions::north_south(0.25, 0.75, 0.5),
            ],
            "rotation+ns",
        )
        .unwrap()
    }

    fn two_rotations_half_offset() -> IfsSystem {
        let a = 2f64.sqrt() - 1.0;
        IfsSystem::new(
            vec![CircleMap::rotation(a), CircleMap::rotation(a + 0.5)],
            "two-rotations",
        )
        .unwrap()
    }

    #[test]
    fn window_indexing_and_shift() {
        let w = SymbolWindow::new(vec![3, 1], vec![2, 2, 1], TailRule::ConstantSymbol(1));
        assert_eq!(w.symbol_at(-2), 3);
        assert_eq!(w.symbol_at(-1), 1);
        assert_eq!(w.symbol_at(0), 2);
        assert_eq!(w.symbol_at(2), 1);
        assert_eq!(w.symbol_at(7), 1); // constant tail
        assert_eq!(w.symbol_at(-9), 1);
        let s = w.shifted(2);
        assert_eq!(s.symbol_at(0), 1);
        assert_eq!(s.symbol_at(-1), 2);
    }

    #[test]
    fn periodic_tail_wraps_blocks() {
        let w = SymbolWindow::new(vec![1, 2], vec![3, 4], TailRule::PeriodicFromLastBlock);
        assert_eq!(w.symbol_at(2), 3);
        assert_eq!(w.symbol_at(3), 4);
        assert_eq!(w.symbol_at(5), 4);
        assert_eq!(w.symbol_at(-3), 2);
        assert_eq!(w.symbol_at(-4), 1);
        assert_eq!(w.symbol_at(-5), 2);
    }

    #[test]
    fn involution_reverses_indices() {
        let w = SymbolWindow::new(vec![1, 2, 1], vec![2, 1, 1], TailRule::ConstantSymbol(2));
        let i = w.involute(8);
        for idx in -6..6i64 {
            assert_eq!(i.symbol_at(idx), w.symbol_at(-idx - 1), "index {idx}");
        }
    }

    #[test]
    fn cylinder_membership() {
        let w = SymbolWindow::new(vec![1, 2], vec![2, 1], TailRule::ConstantSymbol(1));
        assert!(Cylinder::two_sided(vec![1, 2], vec![2]).matches(&w));
        assert!(!Cylinder::two_sided(vec![2, 2], vec![2]).matches(&w));
        assert!(Cylinder {
            neg_word: vec![],
            pos_word: vec![2, 1, 1, 1],
            side: CylinderSide::PosOnly
        }
        .matches(&w));
    }

    #[test]
    fn zero_steps_is_identity() {
        let sys = rotation_ms_pair();
        let w = SymbolWindow::constant(1);
        let x = CirclePoint::new(0.37);
        let (sw, y) = skew_step(&sys, &w, x, 0).unwrap();
        assert_eq!(y, x);
        assert_eq!(sw.symbol_at(0), w.symbol_at(0));
    }

    #[test]
    fn product_system_fiber_is_rotation_orbit() {
        let alpha = 2f64.sqrt() - 1.0;
        let sys = IfsSystem::new(vec![CircleMap::rotation(alpha)], "rot").unwrap();
        let w = SymbolWindow::constant(1);
        let (_, y) = skew_step(&sys, &w, CirclePoint::new(0.0), 7).unwrap();
        assert!(y.distance(CirclePoint::new(7.0 * alpha)) < 1e-12);
    }

    #[test]
    fn backward_then_forward_round_trips() {
        let sys = rotation_ms_pair();
        let w = SymbolWindow::new(vec![2, 1, 2], vec![1, 2, 2], TailRule::ConstantSymbol(2));
        let x = CirclePoint::new(0.123);
        let (wb, y) = skew_step(&sys, &w, x, -9).unwrap();
        let (wf, back) = skew_step(&sys, &wb, y, 9).unwrap();
        assert!(back.distance(x) < 1e-10);
        for i in -5..5i64 {
            assert_eq!(wf.symbol_at(i), w.symbol_at(i));
        }
    }

    #[test]
    fn single_rotation_projection_is_a_singleton() {
        let sys = IfsSystem::new(vec![CircleMap::rotation(2f64.sqrt() - 1.0)], "rot").unwrap();
        let w = SymbolWindow::constant(1);
        let x = CirclePoint::new(0.42);
        let report = unstable_leaf_projection(&sys, &w, x, 50, 1e-9).unwrap();
        assert_eq!(report.fiber_projection.len(), 1);
        assert!(
            CirclePoint::new(report.fiber_projection.points()[0]).distance(x) < 1e-9,
            "projection moved off the base point"
        );
        report.replay(&sys).unwrap();
    }

    #[test]
    fn two_rotation_projection_has_exactly_two_points() {
        let sys = two_rotations_half_offset();
        let w = SymbolWindow::constant(1);
        let x = CirclePoint::new(0.0);
        for depth in 1..=20 {
            let report = unstable_leaf_projection(&sys, &w, x, depth, 1e-9).unwrap();
            assert_eq!(
                report.fiber_projection.len(),
                2,
                "depth {depth}: {:?}",
                report.fiber_projection.points()
            );
            // the two points are x and x + 1/2
            let pts = report.fiber_projection.points();
            assert!(CirclePoint::new(pts[0]).distance(x) < 1e-9);
            assert!(CirclePoint::new(pts[1]).distance(x.translate(0.5)) < 1e-9);
        }
    }

    #[test]
    fn stable_projection_mirrors_unstable_through_duality() {
        let sys = rotation_ms_pair();
        let inverse = sys.inverse_system().unwrap();
        let w = SymbolWindow::new(vec![1, 2, 2], vec![2, 1, 1], TailRule::ConstantSymbol(1));
        let x = CirclePoint::new(0.3);
        let depth = 6;
        let stable = stable_leaf_projection(&sys, &w, x, depth, 1e-9).unwrap();
        let unstable_dual =
            unstable_leaf_projection(&inverse, &w.involute(40), x, depth, 1e-9).unwrap();
        let d = crate::hyperspace::hausdorff_distance(
            &stable.fiber_projection,
            &unstable_dual.fiber_projection,
        );
        assert!(d < 1e-9, "duality gap {d}");
    }

    #[test]
    fn enumeration_equivalence_small_depth() {
        // pruning disabled: the projection equals brute-force enumeration
        let sys = rotation_ms_pair();
        for tail in [TailRule::ConstantSymbol(1), TailRule::ConstantSymbol(2)] {
            let w = SymbolWindow::new(vec![2, 1], vec![1, 2], tail);
            let x = CirclePoint::new(0.77);
            let depth = 6u32;
            let report = unstable_leaf_projection(&sys, &w, x, depth, 1e-12).unwrap();
            let y = backward_fiber(&sys, &w, x, depth).unwrap();
            let mut brute: Vec<f64> = Vec::new();
            let k = sys.k() as u32;
            for code in 0..k.pow(depth) {
                let mut p = y;
                let mut c = code;
                for _ in 0..depth {
                    let s = (c % k) as u8 + 1;
                    c /= k;
                    p = sys.eval_symbol(s, p);
                }
                brute.push(p.value());
            }
            let brute_cloud = PointCloud::new(brute, 1e-12);
            let d = crate::hyperspace::hausdorff_distance(&report.fiber_projection, &brute_cloud);
            assert!(d < 1e-9, "enumeration mismatch {d}");
        }
    }

    #[test]
    fn conjugacy_identity_on_rotations() {
        let sys = two_rotations_half_offset();
        let report = conjugacy_check(&sys, 200, 7).unwrap();
        assert!(report.max_discrepancy < 1e-12, "{report:?}");
    }

    #[test]
    fn leaf_density_witness_for_rotation_ms_pair() {
        let sys = rotation_ms_pair();
        let report = strict_attractor_probe(&sys, 0.02, &seed_grid(16), 120, 1.0 / 512.0);
        assert_eq!(report.verdict, AttractorVerdict::StrictAttractorEvidence);
        let w = SymbolWindow::new(vec![1, 2], vec![2, 1], TailRule::ConstantSymbol(1));
        let x = CirclePoint::new(0.6);
        let cyl = Cylinder::two_sided(vec![2, 1], vec![1]);
        let arc = Arc::new(0.4, 1.0 / 16.0);
        let witness = leaf_density_certify(&sys, &report, &w, x, &cyl, &arc, 16).unwrap();
        // sigma ends with alpha and has the certified length
        assert_eq!(witness.sigma[witness.sigma.len() - 2..], [2, 1]);
        assert_eq!(witness.sigma.len() as u32, witness.n);
        assert!(arc.contains(CirclePoint::new(witness.fiber_point)));
        // replay: f_sigma(f_w^{-n}(x)) reaches the stored fiber point
        let y = backward_fiber(&sys, &w, x, witness.n).unwrap();
        let landed = eval_word(&sys, &Word::forward(witness.sigma.clone()), y).unwrap();
        assert!(landed.distance(CirclePoint::new(witness.fiber_point)) < 1e-10);
    }

    #[test]
    fn two_rotation_leaf_density_exhausts_off_the_orbit() {
        let sys = two_rotations_half_offset();
        // fabricate an evidence report to drive the search; the projection
        // only ever visits two points, so arcs away from them must fail
        let report = AttractorReport {
            verdict: AttractorVerdict::StrictAttractorEvidence,
            horizon_n0: Some(6),
            epsilon: 0.05,
            delta: 1.0 / 512.0,
            budget_n: 40,
            witnesses: vec![],
        };
        let w = SymbolWindow::constant(1);
        let x = CirclePoint::new(0.0);
        let cyl = Cylinder::two_sided(vec![], vec![]);
        let arc = Arc::new(0.2, 1.0 / 32.0); // far from {0, 1/2}
        let err = leaf_density_certify(&sys, &report, &w, x, &cyl, &arc, 8);
        assert!(matches!(err, Err(SkewError::SearchExhausted { .. })));
    }

    #[test]
    fn skew_transitivity_on_the_rotation_ms_pair() {
        let sys = rotation_ms_pair();
        let cert = certify_transitivity(&sys, 1.0 / 16.0, 32, 150, 1e-3).unwrap();
        let cyls = vec![
            (
                Cylinder::two_sided(vec![1], vec![2, 1]),
                Cylinder::two_sided(vec![2], vec![1]),
            ),
            (
                Cylinder::two_sided(vec![], vec![1]),
                Cylinder::two_sided(vec![1, 1], vec![2]),
            ),
        ];
        let arcs = vec![
            (Arc::new(0.1, 0.125), Arc::new(0.6, 0.125)),
            (Arc::new(0.8, 0.125), Arc::new(0.3, 0.125)),
        ];
        let report = skew_transitivity_check(&sys, &cert, &cyls, &arcs).unwrap();
        assert_eq!(report.failures, 0, "{report:?}");
        for (s, (c, d)) in report.samples.iter().zip(&cyls) {
            assert!(s.base_ok && s.fiber_ok);
            let expected = c.pos_word.len() + s.connecting_word.len() + d.neg_word.len();
            assert_eq!(s.n as usize, expected);
        }
    }
}
