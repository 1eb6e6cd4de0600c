//! Expanding covers: a finite ball cover of the circle together with
//! semigroup words whose derivative is uniformly small on a neighborhood of
//! each ball's preimage, certifying the expansion constant `kappa`.

use super::{compose_word, eval_word_inverse, SemiError, Word};
use crate::circle::{Arc, CirclePoint};
use crate::hyperspace::IfsSystem;
use serde::{Deserialize, Serialize};

/// Safety factor guarding grid-sampled derivative suprema.
pub const DERIV_SAFETY: f64 = 1.1;
/// Samples used when estimating a derivative supremum over an arc.
pub const DERIV_SAMPLES: usize = 512;
/// Default neighborhood margin around ball preimages.
pub const DEFAULT_MARGIN: f64 = 1.0 / 16.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpandingCover {
    pub balls: Vec<Arc>,
    pub words: Vec<Word>,
    pub kappa: f64,
    pub margin_epsilon: f64,
}

impl ExpandingCover {
    /// Lower estimate of the Lebesgue number: the smallest, over grid
    /// points, of the deepest containment in any ball.
    pub fn lebesgue_estimate(&self, grid: usize) -> f64 {
        (0..grid)
            .map(|i| {
                let x = CirclePoint::new(i as f64 / grid as f64);
                self.balls.iter().map(|b| b.depth_of(x)).fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Check the two cover conditions: the balls cover the circle and each word
/// contracts (sampled, with safety factor) on a margin-neighborhood of its
/// ball's preimage.
pub fn verify_expanding_cover(
    system: &IfsSystem,
    cover: &ExpandingCover,
    grid: usize,
) -> Result<(), SemiError> {
    if cover.kappa <= 1.0 {
        return Err(SemiError::InvalidInput(format!(
            "expansion constant must exceed 1, got {}",
            cover.kappa
        )));
    }
    if cover.balls.len() != cover.words.len() {
        return Err(SemiError::InvalidInput(
            "cover needs one word per ball".into(),
        ));
    }
    for i in 0..grid {
        let x = CirclePoint::new(i as f64 / grid as f64);
        if !cover.balls.iter().any(|b| b.contains(x)) {
            return Err(SemiError::CoverFails { point: x.value() });
        }
    }
    for (i, (ball, word)) in cover.balls.iter().zip(&cover.words).enumerate() {
        let h = compose_word(system, word)?;
        let lo = eval_word_inverse(system, word, ball.start)?;
        let hi = eval_word_inverse(system, word, ball.end())?;
        let preimage = Arc::new(lo, lo.offset_to(hi).max(f64::MIN_POSITIVE));
        let enlarged = preimage.grow(cover.margin_epsilon);
        let sup = h.max_derivative_on_arc(&enlarged, DERIV_SAMPLES);
        if sup * DERIV_SAFETY > 1.0 / cover.kappa {
            return Err(SemiError::NotContracting {
                word_index: i,
                point: preimage.midpoint().value(),
            });
        }
    }
    Ok(())
}

/// Maximal grid runs where the sampled derivative of `map` stays at or below
/// `bound`, returned as arcs.
fn contraction_zones(mapped: &dyn Fn(CirclePoint) -> f64, bound: f64, grid: usize) -> Vec<Arc> {
    let flags: Vec<bool> = (0..grid)
        .map(|i| mapped(CirclePoint::new(i as f64 / grid as f64)) <= bound)
        .collect();
    let mut zones = Vec::new();
    if flags.iter().all(|&b| b) {
        return vec![Arc::new(0.0, 1.0)];
    }
    if flags.iter().all(|&b| !b) {
        return zones;
    }
    // walk runs of true flags, cyclically
    let start_offset = flags.iter().position(|&b| !b).unwrap();
    let mut run_start: Option<usize> = None;
    for step in 0..=grid {
        let idx = (start_offset + step) % grid;
        if flags[idx] {
            if run_start.is_none() {
                run_start = Some(idx);
            }
        } else if let Some(s) = run_start.take() {
            let len_steps = (idx + grid - s) % grid;
            if len_steps >= 2 {
                zones.push(Arc::new(
                    s as f64 / grid as f64,
                    len_steps as f64 / grid as f64,
                ));
            }
        }
    }
    zones
}

/// Search for an expanding cover: find contraction zones of small generator
/// powers, transport their images with short mover words, and greedily
/// assemble a cover of the grid. Each accepted (ball, word) pair is verified
/// before the cover is returned.
pub fn search_expanding_cover(
    system: &IfsSystem,
    kappa: f64,
    word_depth: u32,
    grid_size: usize,
) -> Result<ExpandingCover, SemiError> {
    if !system.invertible() {
        return Err(SemiError::InvalidInput(
            "expanding covers are defined for invertible systems".into(),
        ));
    }
    if kappa <= 1.0 {
        return Err(SemiError::InvalidInput(format!(
            "kappa must exceed 1, got {kappa}"
        )));
    }
    let margin = DEFAULT_MARGIN;
    let target = 1.0 / (kappa * DERIV_SAFETY);

    // candidate contractors: small powers of single generators
    let mut candidates: Vec<(Arc, Word)> = Vec::new();
    for j in 1..=system.k() as u8 {
        for p in 1..=3u32 {
            let word = Word::forward(vec![j; p as usize]);
            let h = compose_word(system, &word)?;
            let zones = contraction_zones(&|x| h.derivative(x).abs(), target, 2048);
            for zone in zones {
                // shrink so the margin-enlarged zone still contracts
                let Some(core) = zone.shrink(margin) else {
                    continue;
                };
                if core.length < 1e-3 {
                    continue;
                }
                candidates.push((core, word.clone()));
            }
        }
    }
    if candidates.is_empty() {
        return Err(SemiError::NotFound {
            uncovered_points: (0..grid_size)
                .map(|i| i as f64 / grid_size as f64)
                .collect(),
        });
    }

    // movers: all short words, plus longer powers of single generators
    let mut movers: Vec<Word> = vec![Word::identity()];
    let mut level: Vec<Vec<u8>> = vec![Vec::new()];
    let mut exhaustive_len = 0u32;
    while exhaustive_len < word_depth {
        let next_size = level.len() * system.k();
        if movers.len() + next_size > 4096 {
            break;
        }
        let mut next = Vec::with_capacity(next_size);
        for w in &level {
            for s in 1..=system.k() as u8 {
                let mut v = w.clone();
                v.push(s);
                movers.push(Word::forward(v.clone()));
                next.push(v);
            }
        }
        level = next;
        exhaustive_len += 1;
    }
    for j in 1..=system.k() as u8 {
        for p in (exhaustive_len + 1)..=word_depth {
            movers.push(Word::forward(vec![j; p as usize]));
        }
    }

    // size seed balls directly: for each contraction zone, the largest ball
    // around the zone-center image whose margin-enlarged preimage still
    // contracts below target
    struct SeedBall {
        ball: Arc,
        word: Word,
        sup: f64,
        preimage_enlarged: Arc,
    }
    let mut seeds: Vec<SeedBall> = Vec::new();
    for (zone, cword) in &candidates {
        let ch = compose_word(system, cword)?;
        let center = zone.midpoint();
        let image_center = ch.eval(center);
        for frac in [0.45, 0.35, 0.28, 0.22, 0.18, 0.14, 0.11, 0.08, 0.05, 0.03] {
            let rho = zone.length * frac;
            let ball = Arc::new(image_center.translate(-rho), 2.0 * rho);
            let lo = ch.eval_inverse(ball.start)?;
            let hi = ch.eval_inverse(ball.end())?;
            let preimage = Arc::new(lo, lo.offset_to(hi));
            let enlarged = preimage.grow(margin);
            if enlarged.length >= 1.0 {
                continue;
            }
            let sup = ch.max_derivative_on_arc(&enlarged, DERIV_SAMPLES);
            if sup * DERIV_SAFETY <= 1.0 / kappa {
                seeds.push(SeedBall {
                    ball,
                    word: cword.clone(),
                    sup,
                    preimage_enlarged: enlarged,
                });
                break; // largest admissible size for this zone
            }
        }
    }
    if seeds.is_empty() {
        return Err(SemiError::NotFound {
            uncovered_points: (0..grid_size)
                .map(|i| i as f64 / grid_size as f64)
                .collect(),
        });
    }

    // candidate balls: mover images of the seed balls; the mover's
    // derivative factor is checked lazily on first use
    struct Candidate {
        ball: Arc,
        word: Word,
        seed: usize,
        mover: Word,
        verified: Option<bool>,
    }
    let mut pool: Vec<Candidate> = Vec::new();
    for (si, seed) in seeds.iter().enumerate() {
        for mover in &movers {
            let mh = compose_word(system, mover)?;
            let ball = mh.map_arc(&seed.ball)?;
            pool.push(Candidate {
                ball,
                word: seed.word.concat(mover),
                seed: si,
                mover: mover.clone(),
                verified: None,
            });
        }
    }

    // greedy cover with a descending depth requirement: prefer covers whose
    // Lebesgue number is a solid fraction of the ball size
    let rho_max = seeds
        .iter()
        .map(|s| s.ball.length / 2.0)
        .fold(0.0, f64::max);
    let verify_candidate = |pool: &mut Vec<Candidate>, p: usize| -> Result<bool, SemiError> {
        if let Some(v) = pool[p].verified {
            return Ok(v);
        }
        let seed = &seeds[pool[p].seed];
        let ch = compose_word(system, &seed.word)?;
        let mover_domain = ch.map_arc(&seed.preimage_enlarged)?;
        let mh = compose_word(system, &pool[p].mover)?;
        let mover_sup = mh.max_derivative_on_arc(&mover_domain, 128);
        let v = seed.sup * mover_sup * DERIV_SAFETY <= 1.0 / kappa;
        pool[p].verified = Some(v);
        Ok(v)
    };
    let mut chosen: Vec<(Arc, Word)> = Vec::new();
    let mut uncovered_points: Vec<f64> = Vec::new();
    for required in [0.75 * rho_max, 0.5 * rho_max, 0.25 * rho_max, 0.0] {
        chosen.clear();
        uncovered_points.clear();
        for i in 0..grid_size {
            let x = CirclePoint::new(i as f64 / grid_size as f64);
            if chosen.iter().any(|(b, _)| b.depth_of(x) > required) {
                continue;
            }
            let mut order: Vec<usize> = (0..pool.len())
                .filter(|&p| pool[p].ball.depth_of(x) > required)
                .collect();
            order.sort_by(|&a, &b| {
                pool[b]
                    .ball
                    .depth_of(x)
                    .partial_cmp(&pool[a].ball.depth_of(x))
                    .unwrap()
            });
            let mut placed = false;
            for p in order {
                if verify_candidate(&mut pool, p)? {
                    chosen.push((pool[p].ball, pool[p].word.clone()));
                    placed = true;
                    break;
                }
            }
            if !placed {
                uncovered_points.push(x.value());
            }
        }
        if uncovered_points.is_empty() {
            break;
        }
    }
    if !uncovered_points.is_empty() {
        return Err(SemiError::NotFound { uncovered_points });
    }
    let (balls, words): (Vec<Arc>, Vec<Word>) = chosen.into_iter().unzip();
    let cover = ExpandingCover {
        balls,
        words,
        kappa,
        margin_epsilon: margin,
    };
    verify_expanding_cover(system, &cover, grid_size)?;
    Ok(cover)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{constructions, CircleMap};

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

    #[test]
    fn single_map_word_qualifies_at_the_attractor() {
        let sys = rotation_ms_pair();
        let f2 = compose_word(&sys, &Word::forward(vec![2])).unwrap();
        // derivative 1/2 at the attractor: contracts for kappa < 2
        let d = f2.derivative(CirclePoint::new(0.25));
        assert!((d - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rotation_ms_pair_has_an_expanding_cover() {
        let sys = rotation_ms_pair();
        let cover = search_expanding_cover(&sys, 1.2, 24, 512).unwrap();
        verify_expanding_cover(&sys, &cover, 2048).unwrap();
        assert!(cover.lebesgue_estimate(2048) > 0.0);
    }

    #[test]
    fn backward_family_is_expanding_too() {
        let sys = rotation_ms_pair().inverse_system().unwrap();
        let cover = search_expanding_cover(&sys, 1.2, 24, 512).unwrap();
        verify_expanding_cover(&sys, &cover, 2048).unwrap();
    }

    #[test]
    fn pure_rotations_are_never_expanding() {
        let sys = IfsSystem::new(vec![CircleMap::rotation(2f64.sqrt() - 1.0)], "rot").unwrap();
        match search_expanding_cover(&sys, 1.2, 10, 64) {
            Err(SemiError::NotFound { uncovered_points }) => {
                assert_eq!(uncovered_points.len(), 64);
            }
            other => panic!("expected NotFound, got {other:?}"),
        }
    }

    #[test]
    fn kappa_at_most_one_is_rejected() {
        let sys = rotation_ms_pair();
        assert!(matches!(
            search_expanding_cover(&sys, 1.0, 10, 64),
            Err(SemiError::InvalidInput(_))
        ));
    }
}
