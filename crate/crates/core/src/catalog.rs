//! Named example systems wired to their expected probe verdicts. Every
//! constructor returns the system together with a machine-checkable list of
//! expectations; `run_expectation` replays one entry and the full list is
//! the frozen regression surface for the example zoo.

use crate::circle::{Arc, CirclePoint};
use crate::hyperspace::{
    hausdorff_distance, hutchinson_step, seed_grid, strict_attractor_probe, AttractorVerdict,
    IfsSystem, PointCloud,
};
use crate::map::constructions::{self, gap_blending_pair_on, standard_gap};
use crate::map::hermite::{chain_fill, HermiteNode};
use crate::map::CircleMap;
use crate::semigroup::{
    certify_minimality, certify_transitivity, replay_certificate, search_expanding_cover,
    verify_blending, verify_expanding_cover, Word,
};
use crate::skewprod::{
    leaf_density_certify, stable_leaf_projection, unstable_leaf_projection, Cylinder, SkewError,
    SymbolWindow, TailRule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A catalog entry: a system, its provenance note, and the probes it is
/// expected to pass.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NamedSystem {
    pub name: String,
    pub system: IfsSystem,
    pub expected: Vec<Expectation>,
    pub provenance: String,
    pub warnings: Vec<String>,
}

/// One expected verdict with its probe parameters; each variant names an
/// operation from the hyperspace, semigroup or skew-product layers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Expectation {
    /// Fiber projection of the unstable leaf through (constant-1 window, 0)
    /// has at most `max_card` points at every depth up to `depth`.
    UnstableLeafCardinality {
        depth: u32,
        max_card: usize,
        merge_tol: f64,
    },
    /// A complete density certificate exists and replays.
    MinimalityCertificate {
        epsilon: f64,
        grid: usize,
        depth_budget: u32,
        prune_delta: f64,
        backward: bool,
    },
    /// A complete transitivity certificate exists and replays.
    TransitivityCertificate {
        epsilon: f64,
        arc_cover: usize,
        depth_budget: u32,
        prune_delta: f64,
    },
    /// The strict-attractor probe returns the stated verdict.
    AttractorProbe {
        epsilon: f64,
        budget: u32,
        delta: f64,
        seeds: usize,
        backward: bool,
        expect_evidence: bool,
    },
    /// An expanding cover at the stated constant exists and verifies.
    ExpandingCover {
        kappa: f64,
        word_depth: u32,
        grid: usize,
        backward: bool,
    },
    /// Leaf-density witnesses found for all sampled (cylinder, arc) targets.
    LeafDensitySamples {
        samples: u32,
        arc_len: f64,
        max_cyl_len: usize,
        rng_seed: u64,
    },
    /// The leaf-density search exhausts on an arc avoiding the finite orbit.
    LeafDensityExhausts { arc_start: f64, arc_len: f64 },
    /// Iterates of the endpoint pair converge to the Cantor net at the
    /// contraction rate: `d_H(F^n(S), K_20) <= 3^-n / 4 + 2 delta`.
    CantorNetConvergence { depth: u32, delta: f64 },
    /// The expansion `h` maps the Cantor net strictly over itself.
    HStrictness {
        net_depth: u32,
        delta: f64,
        min_witness_gap: f64,
    },
    /// The central interval of the gap maps verifies as a blending region.
    GapBlending { max_beta: f64 },
    /// Stable-leaf projections from net seeds stay Hausdorff-close to the
    /// Cantor net and far from the full circle.
    StableLeafNearCantor {
        depth: u32,
        net_depth: u32,
        tol: f64,
        min_full_distance: f64,
        trials: u32,
        prune_delta: f64,
        rng_seed: u64,
        /// Base-sequence symbols are drawn from `1..=window_symbols`: leaves
        /// stay near the invariant set only when the base word avoids the
        /// strict expansion.
        window_symbols: u8,
    },
    /// Forward orbits of gap points are epsilon-dense.
    GapOrbitDense {
        epsilon: f64,
        depth: u32,
        prune_delta: f64,
    },
    /// Unstable-leaf projection from a gap seed is epsilon-dense.
    UnstableLeafDenseFromGap {
        epsilon: f64,
        depth: u32,
        prune_delta: f64,
    },
}

/// The middle-thirds Cantor net of `[1/4, 1/2]` at the given generation:
/// images of the endpoint pair under the exact affine branches. This is the
/// independent oracle the map-based iterations are tested against.
pub fn cantor_net(depth: u32) -> Vec<f64> {
    let mut pts: Vec<f64> = vec![0.25, 0.5];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(pts.len() * 2);
        for &p in &pts {
            next.push(p / 3.0 + 1.0 / 6.0);
            next.push(p / 3.0 + 1.0 / 3.0);
        }
        next.sort_by(|a, b| a.partial_cmp(b).unwrap());
        next.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        pts = next;
    }
    pts
}

/// The corresponding net of the Cantor set inside `[1/4, 1/3]` (one branch
/// application deeper on the lower side).
pub fn cantor_net_lower(depth: u32) -> Vec<f64> {
    cantor_net(depth)
        .into_iter()
        .map(|p| p / 3.0 + 1.0 / 6.0)
        .collect()
}

fn rational_approximation(alpha: f64, max_q: u64) -> Option<(i64, u64)> {
    let frac = alpha.rem_euclid(1.0);
    (1..=max_q).find_map(|q| {
        let p = (frac * q as f64).round();
        ((frac - p / q as f64).abs() < 1e-9).then_some((p as i64, q))
    })
}

/// Brick swap: exchanges the two generation-1 bricks of the Cantor set by
/// rigid translations, carrying the middle gap onto the complementary arc.
pub fn swap_bricks() -> CircleMap {
    let anchors = [
        HermiteNode::new(0.25, 5.0 / 12.0, 1.0),
        HermiteNode::new(1.0 / 3.0, 0.5, 1.0),
        HermiteNode::new(5.0 / 12.0, 1.25, 1.0),
        HermiteNode::new(0.5, 4.0 / 3.0, 1.0),
        HermiteNode::new(1.25, 17.0 / 12.0, 1.0),
    ];
    CircleMap::hermite_cyclic(chain_fill(&anchors)).expect("brick swap is monotone")
}

/// Thompson-style zoom: expands the deepest left brick onto its parent,
/// translates the sibling, and contracts the right brick one level deeper.
pub fn thompson_zoom() -> CircleMap {
    let anchors = [
        HermiteNode::new(0.25, 0.25, 3.0),
        HermiteNode::new(5.0 / 18.0, 1.0 / 3.0, 3.0),
        HermiteNode::new(11.0 / 36.0, 5.0 / 12.0, 1.0),
        HermiteNode::new(1.0 / 3.0, 4.0 / 9.0, 1.0),
        HermiteNode::new(5.0 / 12.0, 17.0 / 36.0, 1.0 / 3.0),
        HermiteNode::new(0.5, 0.5, 1.0 / 3.0),
        HermiteNode::new(1.25, 1.25, 3.0),
    ];
    CircleMap::hermite_cyclic(chain_fill(&anchors)).expect("zoom is monotone")
}

/// Single rotation: minimal, but a singleton leaf projection and never a
/// strict attractor.
pub fn make_single_rotation(alpha: f64) -> NamedSystem {
    let mut warnings = Vec::new();
    if let Some((p, q)) = rational_approximation(alpha, 64) {
        warnings.push(format!(
            "rotation angle is (close to) rational {p}/{q}: orbits are finite and minimality fails"
        ));
    }
    let system = IfsSystem::new(vec![CircleMap::rotation(alpha)], "single-rotation").unwrap();
    let expected = if warnings.is_empty() {
        vec![
            Expectation::UnstableLeafCardinality {
                depth: 50,
                max_card: 1,
                merge_tol: 1e-9,
            },
            Expectation::AttractorProbe {
                epsilon: 1e-2,
                budget: 60,
                delta: 1.0 / 512.0,
                seeds: 8,
                backward: false,
                expect_evidence: false,
            },
            Expectation::MinimalityCertificate {
                epsilon: 0.05,
                grid: 8,
                depth_budget: 600,
                prune_delta: 1e-3,
                backward: false,
            },
        ]
    } else {
        vec![Expectation::UnstableLeafCardinality {
            depth: 50,
            max_card: 1,
            merge_tol: 1e-9,
        }]
    };
    NamedSystem {
        name: "single-rotation".into(),
        system,
        expected,
        provenance:
            "one irrational rotation: minimal family whose strong leaves project to singletons"
                .into(),
        warnings,
    }
}

/// Two rotations with rationally related angles: minimal, yet the circle is
/// not a strict attractor and leaf projections are finite.
pub fn make_two_rotations(alpha: f64, offset_num: i64, offset_den: u64) -> NamedSystem {
    assert!(offset_den >= 1, "offset denominator must be at least 1");
    let beta = alpha + offset_num as f64 / offset_den as f64;
    let system = IfsSystem::new(
        vec![CircleMap::rotation(alpha), CircleMap::rotation(beta)],
        "two-rotations",
    )
    .unwrap();
    let mut warnings = Vec::new();
    if rational_approximation(alpha, 64).is_some() {
        warnings.push("base angle is (close to) rational: orbits are finite".into());
    }
    let q = if offset_num == 0 {
        1
    } else {
        offset_den as usize
    };
    // an arc centered between consecutive orbit points of the rational
    // offset rotation, which the finite projection can never enter
    let exhaust_start = 0.5 / q.max(2) as f64 - 1.0 / 64.0;
    let expected = vec![
        Expectation::UnstableLeafCardinality {
            depth: 20,
            max_card: q,
            merge_tol: 1e-9,
        },
        Expectation::AttractorProbe {
            epsilon: 1e-2,
            budget: 60,
            delta: 1.0 / 512.0,
            seeds: 8,
            backward: false,
            expect_evidence: false,
        },
        Expectation::MinimalityCertificate {
            epsilon: 0.05,
            grid: 8,
            depth_budget: 400,
            prune_delta: 1e-3,
            backward: false,
        },
        Expectation::LeafDensityExhausts {
            arc_start: exhaust_start,
            arc_len: 1.0 / 32.0,
        },
    ];
    NamedSystem {
        name: "two-rotations".into(),
        system,
        expected,
        provenance: "two irrational rotations with rational difference: minimal but not a strict attractor; finite leaf projections".into(),
        warnings,
    }
}

/// Irrational rotation plus a north-south map: expanding, robustly minimal
/// both ways, with the circle a strict attractor of both families.
pub fn make_rotation_morse_smale(
    alpha: f64,
    attractor: f64,
    repeller: f64,
    contraction: f64,
) -> NamedSystem {
    let mut warnings = Vec::new();
    if rational_approximation(alpha, 64).is_some() {
        warnings
            .push("rotation angle is (close to) rational: minimality of the pair may fail".into());
    }
    let system = IfsSystem::new(
        vec![
            CircleMap::rotation(alpha),
            constructions::north_south(attractor, repeller, contraction),
        ],
        "rotation+morse-smale",
    )
    .unwrap();
    let expected = vec![
        Expectation::MinimalityCertificate {
            epsilon: 1e-2,
            grid: 64,
            depth_budget: 200,
            prune_delta: 1e-3,
            backward: false,
        },
        Expectation::MinimalityCertificate {
            epsilon: 1e-2,
            grid: 64,
            depth_budget: 200,
            prune_delta: 1e-3,
            backward: true,
        },
        Expectation::ExpandingCover {
            kappa: 1.2,
            word_depth: 24,
            grid: 512,
            backward: false,
        },
        Expectation::ExpandingCover {
            kappa: 1.2,
            word_depth: 24,
            grid: 512,
            backward: true,
        },
        Expectation::AttractorProbe {
            epsilon: 1e-2,
            budget: 200,
            delta: 1.0 / 2048.0,
            seeds: 64,
            backward: false,
            expect_evidence: true,
        },
        Expectation::AttractorProbe {
            epsilon: 1e-2,
            budget: 100,
            delta: 1.0 / 512.0,
            seeds: 16,
            backward: true,
            expect_evidence: true,
        },
        Expectation::LeafDensitySamples {
            samples: 50,
            arc_len: 1.0 / 16.0,
            max_cyl_len: 3,
            rng_seed: 2024,
        },
    ];
    NamedSystem {
        name: "rotation+morse-smale".into(),
        system,
        expected,
        provenance: "irrational rotation with a north-south diffeomorphism: expanding and minimal in both directions, both strong foliations dense".into(),
        warnings,
    }
}

/// The degree-2 cover bundle: its two affine inverse branches generate the
/// middle-thirds Cantor set of `[1/4, 1/2]`, `h` expands it strictly, and
/// the gap maps provide a blending region.
pub fn make_cantor_group_instance() -> NamedSystem {
    let (lo, hi) = constructions::cover_branch_contractions();
    let system = IfsSystem::new(vec![lo, hi], "cover-branches").unwrap();
    let expected = vec![
        Expectation::CantorNetConvergence {
            depth: 18,
            delta: 1.0 / 4096.0,
        },
        Expectation::HStrictness {
            net_depth: 12,
            delta: 1.0 / 2048.0,
            min_witness_gap: 0.05,
        },
        Expectation::GapBlending { max_beta: 0.70 },
    ];
    NamedSystem {
        name: "cantor-group-instance".into(),
        system,
        expected,
        provenance:
            "inverse branches of the degree-2 cover with the expansion h and the gap blending pair"
                .into(),
        warnings: Vec::new(),
    }
}

fn cantor_preserving_generators() -> Vec<CircleMap> {
    let (f_gap, g_gap) = gap_blending_pair_on(standard_gap());
    let s = swap_bricks();
    let z = thompson_zoom();
    let mut maps = vec![s.clone(), z.clone(), f_gap.clone(), g_gap.clone()];
    for m in [s, z, f_gap, g_gap] {
        maps.push(CircleMap::inverse(m).expect("generators are homeomorphisms"));
    }
    maps
}

/// Symmetric family preserving the Cantor set: brick swap, brick zoom, the
/// two gap maps, and all four inverses. Neither strong foliation is dense.
pub fn make_cantor_preserving_ifs() -> NamedSystem {
    let system = IfsSystem::new(cantor_preserving_generators(), "cantor-preserving").unwrap();
    let expected = vec![
        Expectation::StableLeafNearCantor {
            depth: 12,
            net_depth: 12,
            tol: 0.02,
            min_full_distance: 0.1,
            trials: 20,
            prune_delta: 1e-3,
            rng_seed: 77,
            window_symbols: 8,
        },
        Expectation::GapOrbitDense {
            epsilon: 1.0 / 32.0,
            depth: 28,
            prune_delta: 1e-3,
        },
        Expectation::TransitivityCertificate {
            epsilon: 1.0 / 32.0,
            arc_cover: 64,
            depth_budget: 60,
            prune_delta: 1e-3,
        },
    ];
    NamedSystem {
        name: "cantor-preserving".into(),
        system,
        expected,
        provenance: "stand-in for the Cantor-set-preserving group action: invariant Cantor set with dense gap orbits".into(),
        warnings: Vec::new(),
    }
}

/// The Cantor-preserving family with the strict expansion `h` appended:
/// forward invariance of the Cantor set breaks, backward invariance stays.
pub fn make_cantor_preserving_with_h() -> NamedSystem {
    let mut maps = cantor_preserving_generators();
    maps.push(constructions::cantor_h());
    let system = IfsSystem::new(maps, "cantor-preserving+h").unwrap();
    let expected = vec![
        Expectation::HStrictness {
            net_depth: 12,
            delta: 1.0 / 2048.0,
            min_witness_gap: 0.05,
        },
        Expectation::UnstableLeafDenseFromGap {
            epsilon: 1.0 / 32.0,
            depth: 28,
            prune_delta: 1e-3,
        },
        Expectation::StableLeafNearCantor {
            depth: 12,
            net_depth: 12,
            tol: 0.02,
            min_full_distance: 0.1,
            trials: 20,
            prune_delta: 1e-3,
            rng_seed: 78,
            window_symbols: 8,
        },
    ];
    NamedSystem {
        name: "cantor-preserving+h".into(),
        system,
        expected,
        provenance: "one-sided pattern: adding the expansion keeps backward invariance of the Cantor set while forward orbits fill the circle".into(),
        warnings: Vec::new(),
    }
}

/// Append identity generators; existing witness words stay valid verbatim.
pub fn pad_with_identity(mut named: NamedSystem, k_target: usize) -> NamedSystem {
    let k = named.system.k();
    assert!(k_target >= k, "cannot pad down from {k} to {k_target}");
    let mut maps = named.system.maps().to_vec();
    maps.extend(std::iter::repeat_with(CircleMap::identity).take(k_target - k));
    named.system = IfsSystem::new(maps, format!("{}+id", named.system.label)).unwrap();
    named.name = format!("{}+id{}", named.name, k_target - k);
    named
}

/// All catalog entries under their CLI names.
pub fn catalog() -> Vec<NamedSystem> {
    let alpha = 2f64.sqrt() - 1.0;
    vec![
        make_single_rotation(alpha),
        make_two_rotations(alpha, 1, 2),
        make_rotation_morse_smale(alpha, 0.25, 0.75, 0.5),
        make_cantor_group_instance(),
        make_cantor_preserving_ifs(),
        make_cantor_preserving_with_h(),
    ]
}

pub fn find(name: &str) -> Option<NamedSystem> {
    catalog().into_iter().find(|n| n.name == name)
}

/// Replay one expectation; `Ok` means the recorded verdict still holds.
pub fn run_expectation(named: &NamedSystem, exp: &Expectation) -> Result<(), String> {
    let sys = &named.system;
    match exp {
        Expectation::UnstableLeafCardinality {
            depth,
            max_card,
            merge_tol,
        } => {
            let w = SymbolWindow::constant(1);
            for d in 1..=*depth {
                let report =
                    unstable_leaf_projection(sys, &w, CirclePoint::new(0.0), d, *merge_tol)
                        .map_err(|e| e.to_string())?;
                if report.fiber_projection.len() > *max_card {
                    return Err(format!(
                        "depth {d}: projection has {} points, expected at most {max_card}",
                        report.fiber_projection.len()
                    ));
                }
            }
            Ok(())
        }
        Expectation::MinimalityCertificate {
            epsilon,
            grid,
            depth_budget,
            prune_delta,
            backward,
        } => {
            let target = if *backward {
                sys.inverse_system().map_err(|e| e.to_string())?
            } else {
                sys.clone()
            };
            let cert = certify_minimality(&target, *epsilon, *grid, *depth_budget, *prune_delta)
                .map_err(|e| e.to_string())?;
            replay_certificate(&target, &cert).map_err(|e| e.to_string())
        }
        Expectation::TransitivityCertificate {
            epsilon,
            arc_cover,
            depth_budget,
            prune_delta,
        } => {
            let cert = certify_transitivity(sys, *epsilon, *arc_cover, *depth_budget, *prune_delta)
                .map_err(|e| e.to_string())?;
            replay_certificate(sys, &cert).map_err(|e| e.to_string())
        }
        Expectation::AttractorProbe {
            epsilon,
            budget,
            delta,
            seeds,
            backward,
            expect_evidence,
        } => {
            let target = if *backward {
                sys.inverse_system().map_err(|e| e.to_string())?
            } else {
                sys.clone()
            };
            let report =
                strict_attractor_probe(&target, *epsilon, &seed_grid(*seeds), *budget, *delta);
            let ok = match expect_evidence {
                true => report.verdict == AttractorVerdict::StrictAttractorEvidence,
                false => report.verdict == AttractorVerdict::NotStrictAttractor,
            };
            if ok {
                Ok(())
            } else {
                Err(format!("probe verdict {:?}", report.verdict))
            }
        }
        Expectation::ExpandingCover {
            kappa,
            word_depth,
            grid,
            backward,
        } => {
            let target = if *backward {
                sys.inverse_system().map_err(|e| e.to_string())?
            } else {
                sys.clone()
            };
            let cover = search_expanding_cover(&target, *kappa, *word_depth, *grid)
                .map_err(|e| e.to_string())?;
            verify_expanding_cover(&target, &cover, *grid).map_err(|e| e.to_string())
        }
        Expectation::LeafDensitySamples {
            samples,
            arc_len,
            max_cyl_len,
            rng_seed,
        } => {
            let report = strict_attractor_probe(sys, 1e-2, &seed_grid(16), 150, 1.0 / 512.0);
            if report.verdict != AttractorVerdict::StrictAttractorEvidence {
                return Err(format!("no attractor evidence: {:?}", report.verdict));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*rng_seed);
            let k = sys.k() as u8;
            for trial in 0..*samples {
                let neg_len = rng.gen_range(0..=*max_cyl_len);
                let pos_len = rng.gen_range(0..=*max_cyl_len);
                let cyl = Cylinder::two_sided(
                    (0..neg_len).map(|_| rng.gen_range(1..=k)).collect(),
                    (0..pos_len).map(|_| rng.gen_range(1..=k)).collect(),
                );
                let arc = Arc::new(rng.gen::<f64>(), *arc_len);
                let window = SymbolWindow::new(
                    (0..8).map(|_| rng.gen_range(1..=k)).collect(),
                    (0..8).map(|_| rng.gen_range(1..=k)).collect(),
                    TailRule::ConstantSymbol(1),
                );
                let x = CirclePoint::new(rng.gen::<f64>());
                leaf_density_certify(sys, &report, &window, x, &cyl, &arc, 16)
                    .map_err(|e| format!("sample {trial}: {e}"))?;
            }
            Ok(())
        }
        Expectation::LeafDensityExhausts { arc_start, arc_len } => {
            let report = strict_attractor_probe(sys, 0.05, &seed_grid(8), 40, 1.0 / 512.0);
            // fabricate a horizon if the probe (correctly) found none: the
            // search must still exhaust
            let mut report = report;
            if report.horizon_n0.is_none() {
                report.verdict = AttractorVerdict::StrictAttractorEvidence;
                report.horizon_n0 = Some(8);
            }
            let w = SymbolWindow::constant(1);
            let cyl = Cylinder::two_sided(vec![], vec![]);
            let arc = Arc::new(*arc_start, *arc_len);
            match leaf_density_certify(sys, &report, &w, CirclePoint::new(0.0), &cyl, &arc, 8) {
                Err(SkewError::SearchExhausted { .. }) => Ok(()),
                Ok(w) => Err(format!(
                    "expected exhaustion but found witness at {}",
                    w.fiber_point
                )),
                Err(other) => Err(other.to_string()),
            }
        }
        Expectation::CantorNetConvergence { depth, delta } => {
            let oracle: Vec<f64> = cantor_net(20);
            let target = PointCloud::new(oracle, *delta);
            let mut cloud = PointCloud::new([0.25, 0.5], *delta);
            for n in 1..=*depth {
                cloud = hutchinson_step(sys, &cloud);
                let d = hausdorff_distance(&cloud, &target);
                let bound = 0.25 * 3f64.powi(-(n as i32)) + 2.0 * delta;
                if d > bound {
                    return Err(format!("step {n}: distance {d} exceeds bound {bound}"));
                }
            }
            Ok(())
        }
        Expectation::HStrictness {
            net_depth,
            delta,
            min_witness_gap,
        } => {
            let h = constructions::cantor_h();
            let net: Vec<f64> = cantor_net(*net_depth);
            let image: Vec<f64> = net
                .iter()
                .map(|&p| h.eval(CirclePoint::new(p)).value())
                .collect();
            let net_cloud = PointCloud::new(net.clone(), 1e-9);
            let image_cloud = PointCloud::new(image, 1e-9);
            // containment: the net sits inside its h-image up to delta
            if !net_cloud.within_of(&image_cloud, *delta) {
                return Err("net escapes its own h-image".into());
            }
            // strictness: some image point is far from the net
            let witness = image_cloud
                .points()
                .iter()
                .map(|&p| net_cloud.distance_to_point(CirclePoint::new(p)))
                .fold(0.0f64, f64::max);
            if witness < *min_witness_gap {
                return Err(format!(
                    "largest image-to-net gap {witness} below {min_witness_gap}"
                ));
            }
            Ok(())
        }
        Expectation::GapBlending { max_beta } => {
            let (f, g) = constructions::gap_blending_pair();
            let gap_sys = IfsSystem::new(vec![f, g], "gap-pair").map_err(|e| e.to_string())?;
            let cert = verify_blending(
                &gap_sys,
                Arc::from_endpoints(0.35, 0.65),
                Arc::from_endpoints(1.0 / 3.0, 2.0 / 3.0),
                &[Word::forward(vec![1]), Word::forward(vec![2])],
                512,
            )
            .map_err(|e| e.to_string())?;
            if cert.contraction_beta > *max_beta {
                return Err(format!(
                    "contraction {} exceeds {max_beta}",
                    cert.contraction_beta
                ));
            }
            if cert.cover_slack <= 0.0 {
                return Err("cover slack is not positive".into());
            }
            Ok(())
        }
        Expectation::StableLeafNearCantor {
            depth,
            net_depth,
            tol,
            min_full_distance,
            trials,
            prune_delta,
            rng_seed,
            window_symbols,
        } => {
            let net = PointCloud::new(cantor_net(*net_depth), 1e-9);
            let full = PointCloud::full_circle_net(1e-3);
            let mut rng = ChaCha8Rng::seed_from_u64(*rng_seed);
            let k = (*window_symbols).min(sys.k() as u8);
            let net_points = cantor_net(*net_depth);
            for trial in 0..*trials {
                let seed = net_points[rng.gen_range(0..net_points.len())];
                let window = SymbolWindow::new(
                    (0..10).map(|_| rng.gen_range(1..=k)).collect(),
                    (0..10).map(|_| rng.gen_range(1..=k)).collect(),
                    TailRule::ConstantSymbol(1),
                );
                let report = stable_leaf_projection(
                    sys,
                    &window,
                    CirclePoint::new(seed),
                    *depth,
                    *prune_delta,
                )
                .map_err(|e| e.to_string())?;
                let d = hausdorff_distance(&report.fiber_projection, &net);
                if d > *tol {
                    return Err(format!(
                        "trial {trial}: stable projection strays {d} from the net (tol {tol})"
                    ));
                }
                let df = hausdorff_distance(&report.fiber_projection, &full);
                if df < *min_full_distance {
                    return Err(format!(
                        "trial {trial}: projection unexpectedly close ({df}) to the full circle"
                    ));
                }
            }
            Ok(())
        }
        Expectation::GapOrbitDense {
            epsilon,
            depth,
            prune_delta,
        } => {
            let gap = standard_gap();
            let seed = gap.midpoint();
            let orbit = crate::semigroup::orbit_bfs(
                sys,
                &PointCloud::singleton(seed, *prune_delta),
                *depth,
                *prune_delta,
            );
            let full = PointCloud::full_circle_net(*prune_delta);
            let gap_dist = crate::hyperspace::directed_hausdorff(full.points(), orbit.points());
            if gap_dist >= *epsilon {
                return Err(format!("gap orbit only {gap_dist}-dense, needed {epsilon}"));
            }
            Ok(())
        }
        Expectation::UnstableLeafDenseFromGap {
            epsilon,
            depth,
            prune_delta,
        } => {
            let window = SymbolWindow::constant(1);
            let seed = standard_gap().midpoint();
            let report = unstable_leaf_projection(sys, &window, seed, *depth, *prune_delta)
                .map_err(|e| e.to_string())?;
            let full = PointCloud::full_circle_net(*prune_delta);
            let d = crate::hyperspace::directed_hausdorff(
                full.points(),
                report.fiber_projection.points(),
            );
            if d >= *epsilon {
                return Err(format!("projection only {d}-dense, needed {epsilon}"));
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_net_generations() {
        assert_eq!(cantor_net(0), vec![0.25, 0.5]);
        let k1 = cantor_net(1);
        let want = [0.25, 1.0 / 3.0, 5.0 / 12.0, 0.5];
        assert_eq!(k1.len(), 4);
        for (a, b) in k1.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(cantor_net(12).len(), 1 << 13);
        // the lower net is the generation-1 image inside [1/4, 1/3]
        let lower = cantor_net_lower(1);
        let want_lower = [0.25, 5.0 / 18.0, 11.0 / 36.0, 1.0 / 3.0];
        for (a, b) in lower.iter().zip(want_lower) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn swap_bricks_preserves_the_net() {
        let s = swap_bricks();
        let net = cantor_net(8);
        let net_cloud = PointCloud::new(net.clone(), 1e-12);
        for &p in &net {
            let image = s.eval(CirclePoint::new(p));
            assert!(
                net_cloud.distance_to_point(image) < 1e-9,
                "swap moved net point {p} off the net (to {image:?})"
            );
        }
        // the two bricks exchange by rigid translation
        assert!((s.eval(CirclePoint::new(0.26)).value() - (0.26 + 1.0 / 6.0)).abs() < 1e-12);
        assert!((s.eval(CirclePoint::new(0.45)).value() - (0.45 - 1.0 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn thompson_zoom_preserves_the_net() {
        // the right brick contracts one generation deeper, so images of the
        // depth-8 net land exactly on the depth-9 net
        let z = thompson_zoom();
        let net = cantor_net(8);
        let finer = PointCloud::new(cantor_net(9), 1e-12);
        for &p in &net {
            let image = z.eval(CirclePoint::new(p));
            assert!(
                finer.distance_to_point(image) < 1e-9,
                "zoom moved net point {p} off the net (to {image:?})"
            );
        }
        // brick actions: expand, translate, contract
        assert!((z.eval(CirclePoint::new(0.26)).value() - (3.0 * 0.26 - 0.5)).abs() < 1e-12);
        assert!((z.eval(CirclePoint::new(0.32)).value() - (0.32 + 1.0 / 9.0)).abs() < 1e-12);
        assert!((z.eval(CirclePoint::new(0.45)).value() - (0.45 / 3.0 + 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn catalog_names_are_unique_and_resolvable() {
        let all = catalog();
        let mut names: Vec<&str> = all.iter().map(|n| n.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), all.len());
        assert!(find("two-rotations").is_some());
        assert!(find("missing").is_none());
    }

    #[test]
    fn rational_rotation_constructor_warns() {
        let named = make_single_rotation(0.5);
        assert!(!named.warnings.is_empty());
        let clean = make_single_rotation(2f64.sqrt() - 1.0);
        assert!(clean.warnings.is_empty());
    }

    #[test]
    fn padding_keeps_certificates_valid_verbatim() {
        let base = make_two_rotations(2f64.sqrt() - 1.0, 1, 2);
        let cert = certify_minimality(&base.system, 0.1, 4, 200, 1e-3).unwrap();
        let padded = pad_with_identity(base, 3);
        assert_eq!(padded.system.k(), 3);
        // old witness words only use the original symbols and replay as-is
        let mut lifted = cert.clone();
        lifted.k = 3;
        replay_certificate(&padded.system, &lifted).unwrap();
        // padding by zero is the identity on the system
        let same = pad_with_identity(make_single_rotation(0.3), 1);
        assert_eq!(same.system.k(), 1);
    }

    #[test]
    fn two_rotation_expectations_replay() {
        let named = make_two_rotations(2f64.sqrt() - 1.0, 1, 2);
        for exp in &named.expected {
            run_expectation(&named, exp).unwrap();
        }
    }

    #[test]
    fn single_rotation_expectations_replay() {
        let named = make_single_rotation(2f64.sqrt() - 1.0);
        for exp in &named.expected {
            run_expectation(&named, exp).unwrap();
        }
    }

    #[test]
    fn cantor_group_instance_expectations_replay() {
        let named = make_cantor_group_instance();
        for exp in &named.expected {
            run_expectation(&named, exp).unwrap();
        }
    }

    #[test]
    fn h_interval_strictness_witness() {
        // the expansion takes the lower-interval net onto the wider net; the
        // image reaches 1/2, which is far from the lower Cantor set
        let h = constructions::cantor_h();
        let val = h.eval(CirclePoint::new(1.0 / 3.0));
        assert!(val.distance(CirclePoint::new(0.5)) < 1e-9);
        let lower = PointCloud::new(cantor_net_lower(12), 1e-12);
        assert!(lower.distance_to_point(CirclePoint::new(0.5)) > 0.05);
    }

    #[test]
    fn cantor_preserving_stable_leaf_stays_near_the_net() {
        let named = make_cantor_preserving_ifs();
        let exp = Expectation::StableLeafNearCantor {
            depth: 12,
            net_depth: 12,
            tol: 0.02,
            min_full_distance: 0.1,
            trials: 5,
            prune_delta: 1e-3,
            rng_seed: 5,
            window_symbols: 8,
        };
        run_expectation(&named, &exp).unwrap();
    }

    #[test]
    fn cantor_preserving_gap_orbits_fill_the_circle() {
        let named = make_cantor_preserving_ifs();
        let exp = Expectation::GapOrbitDense {
            epsilon: 1.0 / 32.0,
            depth: 28,
            prune_delta: 1e-3,
        };
        run_expectation(&named, &exp).unwrap();
    }
}
