//! Words over the generator alphabet, orbit computation, and the
//! certification machinery for minimality, transitivity, expansion and
//! blending of the generated semigroup.

pub mod blend;
pub mod certify;
pub mod expand;

use crate::circle::{ArcUnion, CirclePoint};
use crate::hyperspace::{hutchinson_step, IfsSystem, PointCloud};
use crate::map::constructions::displacement_bump;
use crate::map::{CircleMap, MapError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blend::{
    target_word_search, verify_blending, verify_globalization, BlendingCertificate,
    GlobalizationReport,
};
pub use certify::{
    bootstrap_density, certify_minimality, certify_transitivity, replay_certificate, CertMode,
    DensityCertificate, Witness,
};
pub use expand::{search_expanding_cover, verify_expanding_cover, ExpandingCover};

#[derive(Debug, Error, Clone)]
pub enum SemiError {
    #[error("search budget exhausted with {} uncovered (seed, ball) pairs", uncovered.len())]
    BudgetExhausted {
        uncovered: Vec<(usize, usize)>,
        partial: Box<DensityCertificate>,
    },
    #[error("no expanding words found for {} grid points", uncovered_points.len())]
    NotFound { uncovered_points: Vec<f64> },
    #[error("target ball at {center} fits in no cover ball")]
    CoverMismatch { center: f64 },
    #[error("cover condition fails at {point}")]
    CoverFails { point: f64 },
    #[error("word {word_index} is not contracting at {point}")]
    NotContracting { word_index: usize, point: f64 },
    #[error("no branch image of the blending region contains {point}")]
    NoBranch { point: f64 },
    #[error("witness replay failed: {0}")]
    ReplayFailed(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

/// A word over the alphabet `1..=k`. Symbols apply in list order: the first
/// symbol acts first. Backward words index the inverse maps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    pub symbols: Vec<u8>,
    pub direction: Direction,
}

impl Word {
    pub fn forward(symbols: impl Into<Vec<u8>>) -> Word {
        Word {
            symbols: symbols.into(),
            direction: Direction::Forward,
        }
    }

    pub fn backward(symbols: impl Into<Vec<u8>>) -> Word {
        Word {
            symbols: symbols.into(),
            direction: Direction::Backward,
        }
    }

    pub fn identity() -> Word {
        Word::forward(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `self` then `other`; directions must agree.
    pub fn concat(&self, other: &Word) -> Word {
        assert_eq!(
            self.direction, other.direction,
            "cannot concat mixed directions"
        );
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Word {
            symbols,
            direction: self.direction,
        }
    }
}

/// Realize a word as a single composite map. Generators apply right-to-left
/// in the composition list, so the word's first symbol sits rightmost.
pub fn compose_word(system: &IfsSystem, word: &Word) -> Result<CircleMap, SemiError> {
    check_symbols(system, word)?;
    let maps: Vec<CircleMap> = match word.direction {
        Direction::Forward => word
            .symbols
            .iter()
            .rev()
            .map(|&s| system.map_for(s).clone())
            .collect(),
        Direction::Backward => {
            if !system.invertible() {
                return Err(SemiError::Map(MapError::NonInvertible(0)));
            }
            word.symbols
                .iter()
                .rev()
                .map(|&s| CircleMap::inverse(system.map_for(s).clone()))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    if maps.is_empty() {
        return Ok(CircleMap::identity());
    }
    Ok(CircleMap::compose(maps))
}

/// Evaluate a word at a point without materializing the composite map.
pub fn eval_word(
    system: &IfsSystem,
    word: &Word,
    x: CirclePoint,
) -> Result<CirclePoint, SemiError> {
    check_symbols(system, word)?;
    let mut p = x;
    for &s in &word.symbols {
        p = match word.direction {
            Direction::Forward => system.eval_symbol(s, p),
            Direction::Backward => system.eval_symbol_inverse(s, p)?,
        };
    }
    Ok(p)
}

/// Evaluate the inverse of a word (undo it), for preimage computations.
pub fn eval_word_inverse(
    system: &IfsSystem,
    word: &Word,
    y: CirclePoint,
) -> Result<CirclePoint, SemiError> {
    check_symbols(system, word)?;
    let mut p = y;
    for &s in word.symbols.iter().rev() {
        p = match word.direction {
            Direction::Forward => system.eval_symbol_inverse(s, p)?,
            Direction::Backward => system.eval_symbol(s, p),
        };
    }
    Ok(p)
}

fn check_symbols(system: &IfsSystem, word: &Word) -> Result<(), SemiError> {
    for &s in &word.symbols {
        if s == 0 || s as usize > system.k() {
            return Err(SemiError::InvalidInput(format!(
                "symbol {s} outside alphabet 1..={}",
                system.k()
            )));
        }
    }
    Ok(())
}

/// Union of `F^1(start) .. F^depth(start)`, pruned to the given resolution.
pub fn orbit_bfs(
    system: &IfsSystem,
    start: &PointCloud,
    depth: u32,
    prune_delta: f64,
) -> PointCloud {
    assert!(depth >= 1, "orbit depth must be at least 1");
    let mut level = PointCloud::new(start.points().iter().copied(), prune_delta);
    let mut acc: Vec<f64> = Vec::new();
    for _ in 0..depth {
        level = hutchinson_step(system, &level);
        acc.extend_from_slice(level.points());
    }
    PointCloud::new(acc, prune_delta)
}

/// Compose each generator with a deterministic smooth bump of sup-norm at
/// most `magnitude` and derivative distortion at most `10 * magnitude`.
pub fn perturb_system(system: &IfsSystem, magnitude: f64, seed: u64) -> IfsSystem {
    assert!(
        (0.0..0.01).contains(&magnitude),
        "perturbation magnitude must lie in [0, 0.01)"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maps = system
        .maps()
        .iter()
        .map(|m| {
            let phase: f64 = rng.gen();
            let deltas = [
                rng.gen_range(-0.5..0.5) * magnitude,
                rng.gen_range(-0.5..0.5) * magnitude,
                rng.gen_range(-0.5..0.5) * magnitude,
                rng.gen_range(-0.5..0.5) * magnitude,
            ];
            let bump = displacement_bump(phase, deltas);
            CircleMap::compose(vec![bump, m.clone()])
        })
        .collect();
    IfsSystem::new(maps, format!("{}~{seed}", system.label))
        .expect("perturbation preserves well-formedness")
}

/// True when every generator maps the closure of the interval-domain
/// strictly inside it, refuting transitivity.
pub fn check_absorbing_domain(system: &IfsSystem, domain: &ArcUnion) -> Result<bool, SemiError> {
    if !domain.is_proper() {
        return Err(SemiError::InvalidInput(
            "absorbing check needs a proper interval-domain".into(),
        ));
    }
    let margin = 1e-9;
    for map in system.maps() {
        for arc in domain.arcs() {
            let image = map.map_arc(arc)?;
            // the closed image must sit strictly inside one component
            let mut inside = false;
            for comp in domain.arcs() {
                let off = comp.start.offset_to(image.start);
                if off > margin && off + image.length < comp.length - margin {
                    inside = true;
                    break;
                }
            }
            if !inside {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::Arc;
    use crate::map::constructions;

    fn two_rotations(a: f64, b: f64) -> IfsSystem {
        IfsSystem::new(
            vec![CircleMap::rotation(a), CircleMap::rotation(b)],
            "rotations",
        )
        .unwrap()
    }

    #[test]
    fn single_symbol_word_is_the_generator() {
        let sys = two_rotations(0.3, 0.0);
        let w = Word::forward(vec![1]);
        let m = compose_word(&sys, &w).unwrap();
        assert!(
            m.eval(CirclePoint::new(0.1))
                .distance(CirclePoint::new(0.4))
                < 1e-15
        );
    }

    #[test]
    fn rotations_commute_in_words() {
        let sys = two_rotations(0.2, 0.3);
        let w12 = Word::forward(vec![1, 2]);
        let w21 = Word::forward(vec![2, 1]);
        for i in 0..10 {
            let x = CirclePoint::new(i as f64 / 10.0);
            let a = eval_word(&sys, &w12, x).unwrap();
            let b = eval_word(&sys, &w21, x).unwrap();
            assert!(a.distance(b) < 1e-15);
            assert!(a.distance(x.translate(0.5)) < 1e-15);
        }
    }

    #[test]
    fn backward_word_applies_inverse_rotations() {
        let sys = two_rotations(0.2, 0.3);
        let w = Word::backward(vec![1, 1]);
        let x = CirclePoint::new(0.9);
        let y = eval_word(&sys, &w, x).unwrap();
        assert!(y.distance(x.translate(-0.4)) < 1e-15);
    }

    #[test]
    fn word_concat_matches_composition() {
        let sys = IfsSystem::new(
            vec![
                constructions::north_south(0.25, 0.75, 0.5),
                CircleMap::rotation(2f64.sqrt() - 1.0),
            ],
            "pair",
        )
        .unwrap();
        let w1 = Word::forward(vec![1, 2, 1]);
        let w2 = Word::forward(vec![2, 2]);
        let joined = w1.concat(&w2);
        let composite = compose_word(&sys, &joined).unwrap();
        for i in 0..20 {
            let x = CirclePoint::new(i as f64 / 20.0);
            let stepped = eval_word(&sys, &w2, eval_word(&sys, &w1, x).unwrap()).unwrap();
            let direct = composite.eval(x);
            assert!(stepped.distance(direct) < 1e-12);
        }
    }

    #[test]
    fn forward_then_reversed_backward_returns_home() {
        let sys = IfsSystem::new(
            vec![
                constructions::north_south(0.25, 0.75, 0.5),
                CircleMap::rotation(2f64.sqrt() - 1.0),
            ],
            "pair",
        )
        .unwrap();
        let w = Word::forward(vec![1, 2, 2, 1, 2]);
        let mut back_symbols = w.symbols.clone();
        back_symbols.reverse();
        let back = Word::backward(back_symbols);
        for i in 0..50 {
            let x = CirclePoint::new(i as f64 / 50.0 + 0.001);
            let there = eval_word(&sys, &w, x).unwrap();
            let home = eval_word(&sys, &back, there).unwrap();
            assert!(home.distance(x) < 1e-10, "x = {x:?} home = {home:?}");
        }
    }

    #[test]
    fn irrational_rotation_orbit_points_stay_distinct() {
        let sys = IfsSystem::new(vec![CircleMap::rotation(2f64.sqrt() - 1.0)], "rot").unwrap();
        let cloud = orbit_bfs(&sys, &PointCloud::singleton(0.0, 1e-6), 100, 1e-6);
        assert_eq!(cloud.len(), 100);
    }

    #[test]
    fn zero_magnitude_perturbation_is_numerically_identity() {
        let sys = IfsSystem::new(
            vec![
                constructions::north_south(0.25, 0.75, 0.5),
                CircleMap::rotation(0.3),
            ],
            "pair",
        )
        .unwrap();
        let pert = perturb_system(&sys, 0.0, 42);
        for i in 0..200 {
            let x = CirclePoint::new(i as f64 / 200.0);
            for (m, p) in sys.maps().iter().zip(pert.maps()) {
                assert!(m.eval(x).distance(p.eval(x)) < 1e-14);
            }
        }
    }

    #[test]
    fn north_south_attracting_arc_absorbs() {
        let sys = IfsSystem::new(vec![constructions::north_south(0.25, 0.75, 0.5)], "ns").unwrap();
        let u = ArcUnion::new(vec![Arc::new(0.15, 0.2)]);
        assert!(check_absorbing_domain(&sys, &u).unwrap());
    }

    #[test]
    fn rotations_never_absorb() {
        let sys = two_rotations(0.3, 0.11);
        let u = ArcUnion::new(vec![Arc::new(0.1, 0.3)]);
        assert!(!check_absorbing_domain(&sys, &u).unwrap());
    }

    #[test]
    fn full_circle_domain_is_rejected() {
        let sys = two_rotations(0.3, 0.11);
        let u = ArcUnion::new(vec![Arc::new(0.0, 1.0)]);
        assert!(matches!(
            check_absorbing_domain(&sys, &u),
            Err(SemiError::InvalidInput(_))
        ));
    }
}
