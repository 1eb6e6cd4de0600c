//! Density certificates: breadth-first witness search for minimality and
//! transitivity, replay verification, and the expanding-cover bootstrap that
//! sharpens a certificate by prepending contraction words.

use super::expand::ExpandingCover;
use super::{eval_word, eval_word_inverse, SemiError, Word};
use crate::circle::{Arc, CirclePoint};
use crate::hyperspace::IfsSystem;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CertMode {
    Minimality,
    Transitivity { source_arcs: Vec<Arc> },
}

/// One replayed connection: applying `word` to `start` lands within the
/// certificate's ball radius of `centers[center_index]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub seed_index: usize,
    pub center_index: usize,
    pub start: f64,
    pub word: Word,
}

/// A complete witness map certifying that every seed orbit (or source arc)
/// reaches every ball of an equally spaced cover. `epsilon` is the certified
/// pointwise density: `ball_radius + spacing / 2 <= epsilon`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityCertificate {
    pub system_label: String,
    pub k: usize,
    pub epsilon: f64,
    pub ball_radius: f64,
    pub centers: Vec<f64>,
    pub seeds: Vec<f64>,
    pub witnesses: Vec<Witness>,
    pub mode: CertMode,
}

impl DensityCertificate {
    pub fn spacing(&self) -> f64 {
        1.0 / self.centers.len() as f64
    }

    pub fn is_complete(&self) -> bool {
        self.witnesses.len() == self.seeds.len() * self.centers.len()
    }

    fn witness_for(&self, seed_index: usize, center_index: usize) -> Option<&Witness> {
        // witnesses are stored seed-major in search order
        self.witnesses
            .iter()
            .find(|w| w.seed_index == seed_index && w.center_index == center_index)
    }
}

fn equispaced(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

fn circ_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    d.min(1.0 - d)
}

/// Indices of the equally spaced centers within `radius` of `p`.
fn centers_hit(p: f64, n: usize, radius: f64) -> impl Iterator<Item = usize> {
    let lo = ((p - radius) * n as f64).floor() as i64;
    let hi = ((p + radius) * n as f64).ceil() as i64;
    let n_i = n as i64;
    (lo..=hi).filter_map(move |i| {
        let idx = i.rem_euclid(n_i) as usize;
        let c = idx as f64 / n as f64;
        (circ_dist(p, c) < radius).then_some(idx)
    })
}

struct FrontierPoint {
    point: f64,
    origin: usize,
    start: f64,
    word: Vec<u8>,
}

/// Level-by-level breadth-first search over words in length-then-lex order;
/// the first word reaching each ball wins. Frontiers are deduplicated on a
/// `prune_delta`-cell grid, always keeping exact orbit points.
fn bfs_cover_search(
    system: &IfsSystem,
    starts: &[(f64, usize)],
    centers: &[f64],
    ball_radius: f64,
    depth_budget: u32,
    prune_delta: f64,
) -> Vec<Option<Witness>> {
    let n = centers.len();
    let mut hits: Vec<Option<Witness>> = vec![None; n];
    let mut remaining = n;
    let mut frontier: Vec<FrontierPoint> = starts
        .iter()
        .map(|&(p, origin)| FrontierPoint {
            point: p,
            origin,
            start: p,
            word: Vec::new(),
        })
        .collect();
    let cells = (1.0 / prune_delta).ceil() as u64 + 1;
    for _ in 0..depth_budget {
        if remaining == 0 {
            break;
        }
        let mut seen = std::collections::HashSet::with_capacity(frontier.len() * system.k());
        let mut next: Vec<FrontierPoint> = Vec::with_capacity(frontier.len() * system.k());
        for fp in &frontier {
            for s in 1..=system.k() as u8 {
                let img = system.eval_symbol(s, CirclePoint::new(fp.point)).value();
                let cell = ((img / prune_delta) as u64).min(cells - 1);
                if !seen.insert(cell) {
                    continue;
                }
                let mut word = fp.word.clone();
                word.push(s);
                for idx in centers_hit(img, n, ball_radius) {
                    if hits[idx].is_none() {
                        hits[idx] = Some(Witness {
                            seed_index: 0, // caller fills in
                            center_index: idx,
                            start: fp.start,
                            word: Word::forward(word.clone()),
                        });
                        remaining -= 1;
                    }
                }
                next.push(FrontierPoint {
                    point: img,
                    origin: fp.origin,
                    start: fp.start,
                    word,
                });
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    hits
}

/// Witness map from every grid seed to every ball of an `epsilon/2`-radius
/// cover; a complete certificate verifies pointwise `epsilon`-density of
/// every orbit.
pub fn certify_minimality(
    system: &IfsSystem,
    epsilon: f64,
    grid_size: usize,
    depth_budget: u32,
    prune_delta: f64,
) -> Result<DensityCertificate, SemiError> {
    assert!(
        epsilon > 2.0 * prune_delta,
        "epsilon {epsilon} must exceed twice the prune resolution {prune_delta}"
    );
    let n_centers = (4.0 / epsilon).ceil() as usize;
    let centers = equispaced(n_centers);
    let seeds = equispaced(grid_size);
    let ball_radius = epsilon / 2.0;
    let mut witnesses = Vec::with_capacity(grid_size * n_centers);
    let mut uncovered = Vec::new();
    for (si, &seed) in seeds.iter().enumerate() {
        let hits = bfs_cover_search(
            system,
            &[(seed, 0)],
            &centers,
            ball_radius,
            depth_budget,
            prune_delta,
        );
        for (ci, hit) in hits.into_iter().enumerate() {
            match hit {
                Some(mut w) => {
                    w.seed_index = si;
                    witnesses.push(w);
                }
                None => uncovered.push((si, ci)),
            }
        }
    }
    let cert = DensityCertificate {
        system_label: system.label.clone(),
        k: system.k(),
        epsilon,
        ball_radius,
        centers,
        seeds,
        witnesses,
        mode: CertMode::Minimality,
    };
    if uncovered.is_empty() {
        Ok(cert)
    } else {
        Err(SemiError::BudgetExhausted {
            uncovered,
            partial: Box::new(cert),
        })
    }
}

/// Sample offsets within a source arc, as fractions of the half-length.
const ARC_SAMPLE_OFFSETS: [f64; 5] = [0.0, 0.32, -0.32, 0.71, -0.71];

/// Witness map from every source arc of a cover to every target ball: the
/// topological-transitivity data `h(U) intersects V`.
pub fn certify_transitivity(
    system: &IfsSystem,
    epsilon: f64,
    arc_cover_size: usize,
    depth_budget: u32,
    prune_delta: f64,
) -> Result<DensityCertificate, SemiError> {
    assert!(
        epsilon > 2.0 * prune_delta,
        "epsilon {epsilon} must exceed twice the prune resolution {prune_delta}"
    );
    let n_centers = (4.0 / epsilon).ceil() as usize;
    let centers = equispaced(n_centers);
    let ball_radius = epsilon / 2.0;
    let arc_len = 2.0 / arc_cover_size as f64;
    let source_arcs: Vec<Arc> = (0..arc_cover_size)
        .map(|i| {
            Arc::new(
                CirclePoint::new(i as f64 / arc_cover_size as f64 - arc_len / 2.0),
                arc_len,
            )
        })
        .collect();
    let mut witnesses = Vec::new();
    let mut uncovered = Vec::new();
    for (ai, arc) in source_arcs.iter().enumerate() {
        let starts: Vec<(f64, usize)> = ARC_SAMPLE_OFFSETS
            .iter()
            .enumerate()
            .map(|(oi, off)| {
                let p = arc.midpoint().translate(off * arc.length / 2.0);
                (p.value(), oi)
            })
            .collect();
        let hits = bfs_cover_search(
            system,
            &starts,
            &centers,
            ball_radius,
            depth_budget,
            prune_delta,
        );
        for (ci, hit) in hits.into_iter().enumerate() {
            match hit {
                Some(mut w) => {
                    w.seed_index = ai;
                    witnesses.push(w);
                }
                None => uncovered.push((ai, ci)),
            }
        }
    }
    let seeds = source_arcs.iter().map(|a| a.midpoint().value()).collect();
    let cert = DensityCertificate {
        system_label: system.label.clone(),
        k: system.k(),
        epsilon,
        ball_radius,
        centers,
        seeds,
        witnesses,
        mode: CertMode::Transitivity { source_arcs },
    };
    if uncovered.is_empty() {
        Ok(cert)
    } else {
        Err(SemiError::BudgetExhausted {
            uncovered,
            partial: Box::new(cert),
        })
    }
}

/// Re-run every stored witness; any miss fails the certificate.
pub fn replay_certificate(system: &IfsSystem, cert: &DensityCertificate) -> Result<(), SemiError> {
    if system.k() != cert.k {
        return Err(SemiError::ReplayFailed(format!(
            "certificate is for a {}-generator system, got {}",
            cert.k,
            system.k()
        )));
    }
    if !cert.is_complete() {
        return Err(SemiError::ReplayFailed(format!(
            "certificate has {} witnesses for {} pairs",
            cert.witnesses.len(),
            cert.seeds.len() * cert.centers.len()
        )));
    }
    if cert.ball_radius + cert.spacing() / 2.0 > cert.epsilon + 1e-12 {
        return Err(SemiError::ReplayFailed(
            "ball radius and spacing do not certify the claimed density".into(),
        ));
    }
    for w in &cert.witnesses {
        match &cert.mode {
            CertMode::Minimality => {
                if (w.start - cert.seeds[w.seed_index]).abs() > 1e-12 {
                    return Err(SemiError::ReplayFailed(format!(
                        "witness start {} detached from seed {}",
                        w.start, cert.seeds[w.seed_index]
                    )));
                }
            }
            CertMode::Transitivity { source_arcs } => {
                if !source_arcs[w.seed_index].contains_closed(CirclePoint::new(w.start), 1e-12) {
                    return Err(SemiError::ReplayFailed(format!(
                        "witness start {} outside its source arc",
                        w.start
                    )));
                }
            }
        }
        let landed = eval_word(system, &w.word, CirclePoint::new(w.start))?;
        let center = CirclePoint::new(cert.centers[w.center_index]);
        if landed.distance(center) >= cert.ball_radius {
            return Err(SemiError::ReplayFailed(format!(
                "witness for (seed {}, ball {}) lands at {:?}, {} from center {:?} (radius {})",
                w.seed_index,
                w.center_index,
                landed,
                landed.distance(center),
                center,
                cert.ball_radius
            )));
        }
    }
    Ok(())
}

/// Sharpen a certificate by `kappa^-1` per round: to reach a ball around `y`
/// inside a cover ball `B_i`, reach a ball around `h_i^-1(y)` at the coarser
/// scale and apply `h_i`. All new witnesses are replay-verified.
pub fn bootstrap_density(
    system: &IfsSystem,
    cover: &ExpandingCover,
    cert: &DensityCertificate,
    rounds: u32,
) -> Result<DensityCertificate, SemiError> {
    if rounds == 0 {
        return Ok(cert.clone());
    }
    if !cert.is_complete() {
        return Err(SemiError::InvalidInput(
            "bootstrap needs a complete base certificate".into(),
        ));
    }
    // the first round's landing balls must fit inside cover balls
    let lebesgue = cover.lebesgue_estimate(4096);
    let first_landing = (cert.ball_radius + cert.spacing() / 2.0) / cover.kappa;
    if first_landing > lebesgue {
        return Err(SemiError::InvalidInput(format!(
            "certificate reach {first_landing} is too coarse for the cover (Lebesgue estimate {lebesgue})"
        )));
    }
    // spacing divisor keeping the landing radius below the density claim
    // across all rounds
    let m = 4usize.max((2 * rounds as usize).div_ceil(3) + 1);
    let mut current = cert.clone();
    for _ in 0..rounds {
        current = bootstrap_round(system, cover, &current, m)?;
    }
    Ok(current)
}

fn bootstrap_round(
    system: &IfsSystem,
    cover: &ExpandingCover,
    cert: &DensityCertificate,
    m: usize,
) -> Result<DensityCertificate, SemiError> {
    let reach = cert.ball_radius + cert.spacing() / 2.0;
    if reach > cover.margin_epsilon {
        return Err(SemiError::InvalidInput(format!(
            "certificate reach {reach} exceeds the cover's contraction margin {}",
            cover.margin_epsilon
        )));
    }
    let eps_new = cert.epsilon / cover.kappa;
    let r_new = reach / cover.kappa;
    let n_new = ((2 * m) as f64 / eps_new).ceil() as usize;
    let centers_new = equispaced(n_new);
    if r_new + 0.5 / n_new as f64 > eps_new {
        return Err(SemiError::InvalidInput(
            "bootstrap spacing cannot certify the target density".into(),
        ));
    }
    let n_old = cert.centers.len();
    let mut witnesses = Vec::with_capacity(cert.seeds.len() * n_new);
    for (ti, &y) in centers_new.iter().enumerate() {
        let yp = CirclePoint::new(y);
        // deepest cover ball around the target; the landing ball B(y, r_new)
        // must sit inside it for the contraction argument to confine images
        let (bi, depth) = cover
            .balls
            .iter()
            .enumerate()
            .map(|(i, b)| (i, b.depth_of(yp)))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if depth < r_new {
            return Err(SemiError::CoverMismatch { center: y });
        }
        let z = eval_word_inverse(system, &cover.words[bi], yp)?;
        let j = (z.value() * n_old as f64).round() as usize % n_old;
        for si in 0..cert.seeds.len() {
            let base = cert.witness_for(si, j).expect("complete certificate");
            let word = base.word.concat(&cover.words[bi]);
            let landed = eval_word(system, &word, CirclePoint::new(base.start))?;
            if landed.distance(yp) >= r_new {
                return Err(SemiError::ReplayFailed(format!(
                    "bootstrapped witness for ball {ti} lands {} from {y} (allowed {r_new})",
                    landed.distance(yp)
                )));
            }
            witnesses.push(Witness {
                seed_index: si,
                center_index: ti,
                start: base.start,
                word,
            });
        }
    }
    Ok(DensityCertificate {
        system_label: cert.system_label.clone(),
        k: cert.k,
        epsilon: eps_new,
        ball_radius: r_new,
        centers: centers_new,
        seeds: cert.seeds.clone(),
        witnesses,
        mode: cert.mode.clone(),
    })
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
    fn identity_system_cannot_be_certified_minimal() {
        let sys = IfsSystem::new(vec![CircleMap::identity()], "id").unwrap();
        let err = certify_minimality(&sys, 0.25, 4, 10, 1e-3).unwrap_err();
        match err {
            SemiError::BudgetExhausted { uncovered, .. } => {
                // each seed only ever reaches its own ball
                assert!(!uncovered.is_empty());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rotation_pair_minimality_certificate_replays() {
        let sys = rotation_ms_pair();
        let cert = certify_minimality(&sys, 0.05, 8, 120, 1e-3).unwrap();
        assert!(cert.is_complete());
        replay_certificate(&sys, &cert).unwrap();
    }

    #[test]
    fn tampered_witness_fails_replay() {
        let sys = rotation_ms_pair();
        let mut cert = certify_minimality(&sys, 0.08, 4, 120, 1e-3).unwrap();
        cert.witnesses[3].word.symbols.push(2);
        cert.witnesses[3].word.symbols.push(2);
        cert.witnesses[3].word.symbols.push(2);
        assert!(replay_certificate(&sys, &cert).is_err());
    }

    #[test]
    fn transitivity_follows_for_the_same_system() {
        let sys = rotation_ms_pair();
        let cert = certify_transitivity(&sys, 0.08, 16, 120, 1e-3).unwrap();
        assert!(cert.is_complete());
        replay_certificate(&sys, &cert).unwrap();
    }

    #[test]
    fn identity_system_fails_transitivity_for_far_targets() {
        let sys = IfsSystem::new(vec![CircleMap::identity()], "id").unwrap();
        assert!(certify_transitivity(&sys, 0.25, 4, 10, 1e-3).is_err());
    }

    #[test]
    fn zero_rounds_returns_the_certificate_unchanged() {
        let sys = rotation_ms_pair();
        let cover = crate::semigroup::search_expanding_cover(&sys, 1.2, 24, 256).unwrap();
        let cert = certify_minimality(&sys, 0.08, 4, 120, 1e-3).unwrap();
        let same = bootstrap_density(&sys, &cover, &cert, 0).unwrap();
        assert_eq!(same.epsilon, cert.epsilon);
        assert_eq!(same.witnesses.len(), cert.witnesses.len());
    }

    #[test]
    fn bootstrap_shrinks_epsilon_by_kappa_per_round() {
        let sys = rotation_ms_pair();
        let cover = crate::semigroup::search_expanding_cover(&sys, 1.2, 128, 512).unwrap();
        let cert = certify_minimality(&sys, 0.05, 4, 200, 1e-3).unwrap();
        let boosted = bootstrap_density(&sys, &cover, &cert, 2).unwrap();
        assert!((boosted.epsilon - 0.05 / 1.44).abs() < 1e-12);
        replay_certificate(&sys, &boosted).unwrap();
    }
}
