//! Blending regions: an open arc covered by contracted word-images of
//! itself within a common contraction domain, the greedy word search that
//! steers deep inside a blending region, and globalization checks.

use super::{compose_word, eval_word, eval_word_inverse, SemiError, Word};
use crate::circle::{Arc, ArcUnion, CirclePoint};
use crate::hyperspace::IfsSystem;
use crate::semigroup::expand::DERIV_SAFETY;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlendingCertificate {
    pub region_b: Arc,
    pub domain_d: Arc,
    pub words: Vec<Word>,
    /// Grid-sampled derivative supremum over the contraction domain.
    pub contraction_beta: f64,
    /// Margin by which the word-images of the region cover its closure.
    pub cover_slack: f64,
}

/// Check the two blending conditions on grids and record the constants.
pub fn verify_blending(
    system: &IfsSystem,
    region_b: Arc,
    domain_d: Arc,
    words: &[Word],
    grid: usize,
) -> Result<BlendingCertificate, SemiError> {
    if words.is_empty() {
        return Err(SemiError::InvalidInput(
            "blending needs at least one word".into(),
        ));
    }
    // closure(B) inside the open domain
    let off = domain_d.start.offset_to(region_b.start);
    if !(off > 1e-12 && off + region_b.length < domain_d.length - 1e-12) {
        return Err(SemiError::InvalidInput(
            "the region's closure must sit inside the open domain".into(),
        ));
    }

    // condition 2: every word maps the domain into itself and contracts
    let mut beta: f64 = 0.0;
    for (wi, word) in words.iter().enumerate() {
        let h = compose_word(system, word)?;
        for i in 0..grid {
            // interior samples plus both endpoints
            let x = domain_d
                .start
                .translate(domain_d.length * i as f64 / (grid - 1) as f64);
            let y = h.eval(x);
            if !domain_d.contains_closed(y, 1e-9) {
                return Err(SemiError::NotContracting {
                    word_index: wi,
                    point: x.value(),
                });
            }
            let d = h.derivative(x).abs();
            if d * DERIV_SAFETY >= 1.0 {
                return Err(SemiError::NotContracting {
                    word_index: wi,
                    point: x.value(),
                });
            }
            beta = beta.max(d);
        }
    }
    // condition 1: the closed region sits inside the union of its images
    let images: Vec<Arc> = words
        .iter()
        .map(|w| compose_word(system, w).and_then(|h| h.map_arc(&region_b).map_err(Into::into)))
        .collect::<Result<Vec<_>, _>>()?;
    let union = ArcUnion::new(images);
    let component = union
        .arcs()
        .iter()
        .find(|a| a.contains(region_b.start))
        .copied();
    let slack = component.and_then(|comp| {
        let lead = comp.start.offset_to(region_b.start);
        let trail = comp.length - lead - region_b.length;
        (lead > 0.0 && trail > 0.0).then(|| lead.min(trail))
    });
    let Some(cover_slack) = slack else {
        // locate a witness point of closure(B) that the union misses
        let witness = (0..=grid)
            .map(|i| {
                region_b
                    .start
                    .translate(region_b.length * i as f64 / grid as f64)
            })
            .find(|x| !union.contains(*x))
            .map(|x| x.value())
            .unwrap_or_else(|| region_b.end().value());
        return Err(SemiError::CoverFails { point: witness });
    };

    Ok(BlendingCertificate {
        region_b,
        domain_d,
        words: words.to_vec(),
        contraction_beta: beta,
        cover_slack,
    })
}

/// Re-verify a stored blending certificate; the fresh constants must be at
/// least as good as the recorded ones.
pub fn replay_blending(
    system: &IfsSystem,
    cert: &BlendingCertificate,
    grid: usize,
) -> Result<(), SemiError> {
    let fresh = verify_blending(system, cert.region_b, cert.domain_d, &cert.words, grid)?;
    if fresh.contraction_beta > cert.contraction_beta + 1e-9 {
        return Err(SemiError::ReplayFailed(format!(
            "contraction degraded: {} vs recorded {}",
            fresh.contraction_beta, cert.contraction_beta
        )));
    }
    if fresh.cover_slack < cert.cover_slack - 1e-9 {
        return Err(SemiError::ReplayFailed(format!(
            "cover slack degraded: {} vs recorded {}",
            fresh.cover_slack, cert.cover_slack
        )));
    }
    Ok(())
}

/// Greedily build a word whose image of the blending region shrinks onto
/// `target_x`: at each step pick the first branch whose image still contains
/// the target, until the image diameter drops below `tol`.
pub fn target_word_search(
    system: &IfsSystem,
    blend: &BlendingCertificate,
    target_x: CirclePoint,
    tol: f64,
) -> Result<Word, SemiError> {
    assert!(tol > 0.0, "tolerance must be positive");
    if !blend.region_b.contains_closed(target_x, 0.0) {
        return Err(SemiError::InvalidInput(format!(
            "target {} lies outside the blending region",
            target_x.value()
        )));
    }
    let maps: Vec<_> = blend
        .words
        .iter()
        .map(|w| compose_word(system, w))
        .collect::<Result<Vec<_>, _>>()?;
    let mut indices: Vec<usize> = Vec::new();
    let mut y = target_x;
    loop {
        // image of B under the chosen chain (outermost first)
        let mut image = blend.region_b;
        for &idx in indices.iter().rev() {
            image = maps[idx].map_arc(&image)?;
        }
        if image.length < tol {
            let mut word = Word::forward(Vec::new());
            for &idx in indices.iter().rev() {
                word = word.concat(&blend.words[idx]);
            }
            let landed = eval_word(system, &word, blend.region_b.midpoint())?;
            if landed.distance(target_x) >= tol {
                return Err(SemiError::ReplayFailed(format!(
                    "target word lands {} away at tolerance {tol}",
                    landed.distance(target_x)
                )));
            }
            return Ok(word);
        }
        let next = maps.iter().enumerate().find_map(|(j, h)| {
            let z = h.eval_inverse(y).ok()?;
            let off = blend.region_b.start.offset_to(z);
            (off > 0.0 && off < blend.region_b.length).then_some((j, z))
        });
        match next {
            Some((j, z)) => {
                indices.push(j);
                y = z;
            }
            None => return Err(SemiError::NoBranch { point: y.value() }),
        }
        if indices.len() > 10_000 {
            return Err(SemiError::NoBranch { point: y.value() });
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlobalizationReport {
    pub forward_uncovered: Vec<f64>,
    pub backward_uncovered: Vec<f64>,
}

impl GlobalizationReport {
    pub fn is_globalized(&self) -> bool {
        self.forward_uncovered.is_empty() && self.backward_uncovered.is_empty()
    }
}

/// Grid check that the forward images and backward preimages of `region`
/// under the given words each cover the circle.
pub fn verify_globalization(
    system: &IfsSystem,
    region: Arc,
    forward_words: &[Word],
    backward_words: &[Word],
    grid: usize,
) -> Result<GlobalizationReport, SemiError> {
    let mut forward_uncovered = Vec::new();
    let mut backward_uncovered = Vec::new();
    for i in 0..grid {
        let x = CirclePoint::new(i as f64 / grid as f64);
        let fwd = forward_words
            .iter()
            .map(|w| eval_word_inverse(system, w, x))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .any(|z| region.contains(z));
        if !fwd {
            forward_uncovered.push(x.value());
        }
        let bwd = backward_words
            .iter()
            .map(|w| eval_word(system, w, x))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .any(|z| region.contains(z));
        if !bwd {
            backward_uncovered.push(x.value());
        }
    }
    Ok(GlobalizationReport {
        forward_uncovered,
        backward_uncovered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::constructions;
    use crate::map::CircleMap;

    fn gap_pair_system() -> IfsSystem {
        let (f, g) = constructions::gap_blending_pair();
        IfsSystem::new(vec![f, g], "gap-pair").unwrap()
    }

    fn gap_blend() -> BlendingCertificate {
        let sys = gap_pair_system();
        verify_blending(
            &sys,
            Arc::from_endpoints(0.35, 0.65),
            Arc::from_endpoints(1.0 / 3.0, 2.0 / 3.0),
            &[Word::forward(vec![1]), Word::forward(vec![2])],
            512,
        )
        .unwrap()
    }

    #[test]
    fn gap_center_is_a_blending_region() {
        let cert = gap_blend();
        // affine middle pieces contract by 2/3
        assert!((cert.contraction_beta - 2.0 / 3.0).abs() < 1e-9);
        // images (0.3444.., 0.5444..) and (0.4555.., 0.6555..) overlap and
        // cover [0.35, 0.65] with slack 1/180
        assert!(cert.cover_slack > 0.005 && cert.cover_slack < 0.006);
    }

    #[test]
    fn whole_gap_interval_fails_the_cover() {
        let sys = gap_pair_system();
        let err = verify_blending(
            &sys,
            Arc::from_endpoints(1.0 / 3.0, 2.0 / 3.0),
            Arc::from_endpoints(1.0 / 3.0 - 1e-3, 2.0 / 3.0 + 1e-3),
            &[Word::forward(vec![1]), Word::forward(vec![2])],
            512,
        )
        .unwrap_err();
        // the word images only reach the endpoints open, never cover them
        assert!(matches!(err, SemiError::CoverFails { .. }), "{err:?}");
    }

    #[test]
    fn identity_word_is_not_contracting() {
        let sys = gap_pair_system();
        let err = verify_blending(
            &sys,
            Arc::from_endpoints(0.35, 0.65),
            Arc::from_endpoints(1.0 / 3.0, 2.0 / 3.0),
            &[Word::identity()],
            128,
        )
        .unwrap_err();
        assert!(matches!(err, SemiError::NotContracting { .. }));
    }

    #[test]
    fn target_search_hits_the_center() {
        let sys = gap_pair_system();
        let blend = gap_blend();
        let word = target_word_search(&sys, &blend, CirclePoint::new(0.5), 1e-3).unwrap();
        // contraction 2/3 per step on an interval of length 0.3
        assert!(word.len() <= 15, "word length {}", word.len());
        let landed = eval_word(&sys, &word, blend.region_b.midpoint()).unwrap();
        assert!(landed.distance(CirclePoint::new(0.5)) < 1e-3);
    }

    #[test]
    fn loose_tolerance_accepts_the_empty_word() {
        let sys = gap_pair_system();
        let blend = gap_blend();
        let word = target_word_search(&sys, &blend, blend.region_b.midpoint(), 0.5).unwrap();
        assert!(word.is_empty());
    }

    #[test]
    fn rotation_words_globalize_any_arc() {
        let sys = IfsSystem::new(vec![CircleMap::rotation(2f64.sqrt() - 1.0)], "rot").unwrap();
        let region = Arc::new(0.2, 0.1);
        // enough rotates of a length-0.1 arc to cover the circle
        let words: Vec<Word> = (1..=30).map(|n| Word::forward(vec![1; n])).collect();
        let report = verify_globalization(&sys, region, &words, &words, 1024).unwrap();
        assert!(report.is_globalized(), "{report:?}");
    }

    #[test]
    fn full_circle_region_needs_one_word() {
        let sys = IfsSystem::new(vec![CircleMap::rotation(0.1)], "rot").unwrap();
        let region = Arc::new(0.0, 1.0);
        let words = vec![Word::forward(vec![1])];
        let report = verify_globalization(&sys, region, &words, &words, 256).unwrap();
        assert!(report.is_globalized());
    }
}
