//! Finite approximations of the hyperspace of compact subsets of the circle.
//!
//! Compact sets are delta-nets (`PointCloud`); the Hutchinson operator maps
//! clouds through every generator and re-merges; attractor and stability
//! probes follow the convergence of `F^n(S)` to the full circle in the
//! Hausdorff metric.

use crate::circle::{Arc, CirclePoint};
use crate::map::{CircleMap, MapError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default merging radius for clouds.
pub const DEFAULT_DELTA: f64 = 1.0 / 2048.0;

#[derive(Debug, Error, Clone)]
pub enum HyperError {
    #[error("iteration budget exhausted after {} steps", trajectory.len())]
    BudgetExhausted { trajectory: Vec<(u32, f64)> },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// A sorted delta-net standing in for a nonempty compact subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<f64>,
    resolution: f64,
}

impl PointCloud {
    /// Build a cloud from arbitrary points, merging cyclically-close ones.
    pub fn new(points: impl IntoIterator<Item = f64>, resolution: f64) -> PointCloud {
        assert!(resolution > 0.0, "resolution must be positive");
        let mut pts: Vec<f64> = points
            .into_iter()
            .map(|p| CirclePoint::new(p).value())
            .collect();
        assert!(!pts.is_empty(), "point cloud must be nonempty");
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let merged = merge_sorted(&pts, resolution / 2.0);
        PointCloud {
            points: merged,
            resolution,
        }
    }

    pub fn singleton(x: impl Into<CirclePoint>, resolution: f64) -> PointCloud {
        PointCloud::new([x.into().value()], resolution)
    }

    /// Equally spaced net covering the whole circle at the given resolution:
    /// every circle point is within `resolution / 2` of the net.
    pub fn full_circle_net(resolution: f64) -> PointCloud {
        let n = (1.0 / resolution).ceil() as usize;
        PointCloud::new((0..n).map(|i| i as f64 / n as f64), resolution)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    pub fn iter(&self) -> impl Iterator<Item = CirclePoint> + '_ {
        self.points.iter().map(|&p| CirclePoint::new(p))
    }

    /// Distance from a point to the cloud.
    pub fn distance_to_point(&self, x: CirclePoint) -> f64 {
        let v = x.value();
        let j = self.points.partition_point(|&p| p <= v);
        let m = self.points.len();
        let before = self.points[(j + m - 1) % m];
        let after = self.points[j % m];
        x.distance(CirclePoint::new(before))
            .min(x.distance(CirclePoint::new(after)))
    }

    /// Every point of `self` lies within `eps` of `other`.
    pub fn within_of(&self, other: &PointCloud, eps: f64) -> bool {
        directed_hausdorff(&self.points, &other.points) < eps
    }

    /// Remove the points of `arc` (used by the stability probe). Returns
    /// `None` if nothing survives.
    pub fn delete_arc(&self, arc: &Arc) -> Option<PointCloud> {
        let remaining: Vec<f64> = self
            .points
            .iter()
            .copied()
            .filter(|&p| !arc.contains(CirclePoint::new(p)))
            .collect();
        if remaining.is_empty() {
            None
        } else {
            Some(PointCloud::new(remaining, self.resolution))
        }
    }
}

// Greedy net: keep a point when it clears the last kept one by the merge
// gap. Dropped points stay within the gap of a kept representative, and
// representatives are always true input points.
fn merge_sorted(sorted: &[f64], min_gap: f64) -> Vec<f64> {
    let mut reps: Vec<f64> = Vec::with_capacity(sorted.len());
    let mut last_kept = f64::NEG_INFINITY;
    for &p in sorted {
        if p - last_kept >= min_gap {
            reps.push(p);
            last_kept = p;
        }
    }
    // wraparound: the first and last representatives may sit too close
    if reps.len() > 1 && reps[0] + 1.0 - *reps.last().unwrap() < min_gap {
        reps.remove(0);
    }
    reps
}

/// Directed Hausdorff distance `max_{a in A} d(a, B)` via a circular
/// two-pointer sweep over the sorted clouds.
pub fn directed_hausdorff(a: &[f64], b: &[f64]) -> f64 {
    let m = b.len();
    let mut j = 0usize; // first index with b[j] > a_i, advanced monotonically
    let mut worst = 0.0f64;
    for &x in a {
        while j < m && b[j] <= x {
            j += 1;
        }
        let before = b[(j + m - 1) % m];
        let after = b[j % m];
        let d1 = circ_dist(x, before);
        let d2 = circ_dist(x, after);
        worst = worst.max(d1.min(d2));
    }
    worst
}

fn circ_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    d.min(1.0 - d)
}

/// Hausdorff distance between two clouds; equals the quadratic brute force.
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> f64 {
    directed_hausdorff(&a.points, &b.points).max(directed_hausdorff(&b.points, &a.points))
}

/// A finite ordered family of circle maps with alphabet `1..=k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IfsSystem {
    maps: Vec<CircleMap>,
    pub label: String,
}

impl IfsSystem {
    pub fn new(maps: Vec<CircleMap>, label: impl Into<String>) -> Result<IfsSystem, MapError> {
        if maps.is_empty() {
            return Err(MapError::IllFormedMap(
                "system needs at least one map".into(),
            ));
        }
        for m in &maps {
            m.validate()?;
        }
        Ok(IfsSystem {
            maps,
            label: label.into(),
        })
    }

    pub fn k(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[CircleMap] {
        &self.maps
    }

    /// Map for a 1-based symbol.
    pub fn map_for(&self, symbol: u8) -> &CircleMap {
        &self.maps[(symbol - 1) as usize]
    }

    pub fn invertible(&self) -> bool {
        self.maps.iter().all(|m| m.degree_of_cover() == 1)
    }

    /// The family of inverse maps, in the same symbol order.
    pub fn inverse_system(&self) -> Result<IfsSystem, MapError> {
        let maps = self
            .maps
            .iter()
            .map(|m| CircleMap::inverse(m.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        IfsSystem::new(maps, format!("{}^-1", self.label))
    }

    pub fn eval_symbol(&self, symbol: u8, x: CirclePoint) -> CirclePoint {
        self.map_for(symbol).eval(x)
    }

    pub fn eval_symbol_inverse(&self, symbol: u8, x: CirclePoint) -> Result<CirclePoint, MapError> {
        self.map_for(symbol).eval_inverse(x)
    }
}

/// One application of the Hutchinson operator `F(A) = union f_i(A)`.
pub fn hutchinson_step(system: &IfsSystem, cloud: &PointCloud) -> PointCloud {
    let mut images = Vec::with_capacity(cloud.len() * system.k());
    for map in system.maps() {
        for &p in cloud.points() {
            images.push(map.lift(p).rem_euclid(1.0));
        }
    }
    PointCloud::new(images, cloud.resolution())
}

/// Trajectory of Hausdorff distances under iteration of the Hutchinson
/// operator. With a `target`, distances are measured against it and the full
/// budget runs; without one, successive distances are recorded and iteration
/// stops early once they fall below `resolution / 4`.
pub fn iterate_to_attractor(
    system: &IfsSystem,
    start: &PointCloud,
    budget_n: u32,
    target: Option<&PointCloud>,
) -> Result<Vec<(u32, f64)>, HyperError> {
    assert!(budget_n >= 1, "budget must be at least 1");
    let mut trajectory = Vec::new();
    let mut current = start.clone();
    for n in 1..=budget_n {
        let next = hutchinson_step(system, &current);
        match target {
            Some(t) => trajectory.push((n, hausdorff_distance(&next, t))),
            None => {
                let step = hausdorff_distance(&next, &current);
                trajectory.push((n, step));
                if step < current.resolution() / 4.0 {
                    return Ok(trajectory);
                }
            }
        }
        current = next;
    }
    match target {
        Some(_) => Ok(trajectory),
        None => Err(HyperError::BudgetExhausted { trajectory }),
    }
}

/// Verdict of a strict-attractor probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttractorVerdict {
    StrictAttractorEvidence,
    NotStrictAttractor,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedWitness {
    pub seed: f64,
    pub iterations: u32,
    pub final_distance: f64,
}

/// Machine-checkable outcome of `strict_attractor_probe`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttractorReport {
    pub verdict: AttractorVerdict,
    pub horizon_n0: Option<u32>,
    pub epsilon: f64,
    pub delta: f64,
    pub budget_n: u32,
    pub witnesses: Vec<SeedWitness>,
}

/// Equally spaced probe seeds.
pub fn seed_grid(count: usize) -> Vec<CirclePoint> {
    (0..count)
        .map(|i| CirclePoint::new(i as f64 / count as f64))
        .collect()
}

/// Iterate `F^n({y})` for every seed and test epsilon-density against the
/// full-circle net. All seeds eventually (and permanently, up to the budget)
/// epsilon-dense yields evidence plus a uniform horizon; a seed that stays
/// at Hausdorff distance `>= 2 epsilon` from the net for the whole budget is
/// a negative witness.
pub fn strict_attractor_probe(
    system: &IfsSystem,
    epsilon: f64,
    seeds: &[CirclePoint],
    budget_n: u32,
    delta: f64,
) -> AttractorReport {
    assert!(
        epsilon > 2.0 * delta,
        "epsilon {epsilon} must exceed twice the working resolution {delta}"
    );
    let net = PointCloud::full_circle_net(delta);
    let mut witnesses = Vec::with_capacity(seeds.len());
    let mut horizons = Vec::new();
    let mut any_stagnant = false;
    let mut all_pass = true;

    for &seed in seeds {
        let mut cloud = PointCloud::singleton(seed, delta);
        let mut last_not_dense = 0u32; // latest n at which the cloud was not eps-dense
        let mut ever_dense = false;
        let mut min_distance = f64::INFINITY;
        let mut final_distance = f64::NAN;
        for n in 1..=budget_n {
            cloud = hutchinson_step(system, &cloud);
            let dist = directed_hausdorff(net.points(), cloud.points());
            let dh = dist.max(directed_hausdorff(cloud.points(), net.points()));
            min_distance = min_distance.min(dh);
            final_distance = dh;
            if dist < epsilon {
                ever_dense = true;
            } else {
                last_not_dense = n;
            }
        }
        witnesses.push(SeedWitness {
            seed: seed.value(),
            iterations: budget_n,
            final_distance,
        });
        if min_distance >= 2.0 * epsilon {
            any_stagnant = true;
        }
        if ever_dense && last_not_dense < budget_n {
            horizons.push(last_not_dense + 1);
        } else {
            all_pass = false;
        }
    }

    let (verdict, horizon_n0) = if any_stagnant {
        (AttractorVerdict::NotStrictAttractor, None)
    } else if all_pass {
        (
            AttractorVerdict::StrictAttractorEvidence,
            horizons.iter().copied().max(),
        )
    } else {
        (AttractorVerdict::Inconclusive, None)
    };
    AttractorReport {
        verdict,
        horizon_n0,
        epsilon,
        delta,
        budget_n,
        witnesses,
    }
}

/// Per-arc outcome of the stability probe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityViolation {
    pub arc: Arc,
    pub n: u32,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReport {
    pub epsilon: f64,
    pub violations: Vec<StabilityViolation>,
    /// Largest deletion length whose trimmed net stayed epsilon-close to the
    /// full net for the whole budget.
    pub empirical_delta: Option<f64>,
}

/// Delete each arc from the full net, iterate, and verify the trimmed net
/// stays epsilon-close to the full circle for every step up to the budget.
pub fn stability_probe(
    system: &IfsSystem,
    epsilon: f64,
    deletion_arcs: &[Arc],
    budget_n: u32,
    delta: f64,
) -> StabilityReport {
    let net = PointCloud::full_circle_net(delta);
    let mut violations = Vec::new();
    let mut empirical_delta: Option<f64> = None;
    for arc in deletion_arcs {
        let Some(mut cloud) = net.delete_arc(arc) else {
            violations.push(StabilityViolation {
                arc: *arc,
                n: 0,
                distance: 0.5,
            });
            continue;
        };
        let mut failed = None;
        let initial = hausdorff_distance(&cloud, &net);
        if initial >= epsilon {
            failed = Some((0, initial));
        }
        if failed.is_none() {
            for n in 1..=budget_n {
                cloud = hutchinson_step(system, &cloud);
                let d = hausdorff_distance(&cloud, &net);
                if d >= epsilon {
                    failed = Some((n, d));
                    break;
                }
            }
        }
        match failed {
            Some((n, distance)) => violations.push(StabilityViolation {
                arc: *arc,
                n,
                distance,
            }),
            None => {
                empirical_delta = Some(match empirical_delta {
                    Some(cur) => cur.max(arc.length),
                    None => arc.length,
                });
            }
        }
    }
    StabilityReport {
        epsilon,
        violations,
        empirical_delta,
    }
}
