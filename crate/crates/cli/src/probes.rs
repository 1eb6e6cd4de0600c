//! Probe dispatch: each probe resolves the configured system, runs one
//! operation from the library, and packages the outcome with an exit code.

use crate::config::RunConfig;
use circle_ifs::circle::{Arc, CirclePoint};
use circle_ifs::hyperspace::{
    iterate_to_attractor, seed_grid, stability_probe, strict_attractor_probe, AttractorVerdict,
    HyperError, PointCloud,
};
use circle_ifs::semigroup::{
    bootstrap_density, certify_minimality, certify_transitivity, replay_certificate,
    search_expanding_cover, target_word_search, verify_blending, verify_expanding_cover, SemiError,
    Word,
};
use circle_ifs::skewprod::{
    conjugacy_check, leaf_density_certify, skew_transitivity_check, stable_leaf_projection,
    unstable_leaf_projection, Cylinder, SkewError, SymbolWindow, TailRule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub struct Outcome {
    pub exit_code: u8,
    pub verdict: String,
    pub key_metric: f64,
    pub result: Value,
    pub cloud: Option<Vec<f64>>,
}

pub fn execute(config: &RunConfig) -> Result<Outcome, String> {
    let probe = config.probe()?.to_string();
    let system = config.resolve_system()?;
    match probe.as_str() {
        "unstable-leaf" | "stable-leaf" => leaf_probe(config, &system, probe == "stable-leaf"),
        "attractor" => attractor_probe(config, &system),
        "stability" => stability(config, &system),
        "minimality" | "transitivity" => density(config, &system, probe == "transitivity"),
        "expanding" => expanding(config, &system),
        "blending" => blending(config, &system),
        "bootstrap" => bootstrap(config, &system),
        "iterate" => iterate(config, &system),
        "conjugacy" => conjugacy(config, &system),
        "leaf-density" => leaf_density(config, &system),
        "skew-transitivity" => skew_transitivity(config, &system),
        other => Err(format!("unhandled probe `{other}`")),
    }
}

fn window_from(config: &RunConfig) -> Result<SymbolWindow, String> {
    let digits = |key: &str| -> Result<Vec<u8>, String> {
        Ok(config
            .params
            .get(key)
            .map(|s| {
                s.chars()
                    .map(|c| {
                        c.to_digit(10)
                            .map(|d| d as u8)
                            .ok_or_else(|| format!("bad symbol `{c}` in {key}"))
                    })
                    .collect::<Result<Vec<u8>, String>>()
            })
            .transpose()?
            .unwrap_or_default())
    };
    let tail = config.u32("tail", 1)? as u8;
    Ok(SymbolWindow::new(
        digits("past")?,
        digits("future")?,
        TailRule::ConstantSymbol(tail),
    ))
}

fn leaf_probe(
    config: &RunConfig,
    system: &circle_ifs::IfsSystem,
    stable: bool,
) -> Result<Outcome, String> {
    let depth = config.u32("depth", 20)?;
    let prune = config.f64("delta", 1e-9)?;
    let x = CirclePoint::new(config.f64("x", 0.0)?);
    let window = window_from(config)?;
    let report = if stable {
        stable_leaf_projection(system, &window, x, depth, prune)
    } else {
        unstable_leaf_projection(system, &window, x, depth, prune)
    }
    .map_err(|e| e.to_string())?;
    report.replay(system).map_err(|e| e.to_string())?;
    let size = report.fiber_projection.len();
    let cloud = report.fiber_projection.points().to_vec();
    Ok(Outcome {
        exit_code: 0,
        verdict: format!("projection-size-{size}"),
        key_metric: size as f64,
        result: json!({
            "certificate_type": "leaf",
            "certificate": report,
        }),
        cloud: Some(cloud),
    })
}

fn attractor_probe(config: &RunConfig, system: &circle_ifs::IfsSystem) -> Result<Outcome, String> {
    let epsilon = config.f64("epsilon", 1e-2)?;
    let budget = config.u32("budget", 100)?;
    let delta = config.f64("delta", 1.0 / 512.0)?;
    let seeds = config.usize("seeds", 16)?;
    let target = if config.flag("backward") {
        system.inverse_system().map_err(|e| e.to_string())?
    } else {
        system.clone()
    };
    let report = strict_attractor_probe(&target, epsilon, &seed_grid(seeds), budget, delta);
    let verdict = format!("{:?}", report.verdict);
    let exit_code = match config.params.get("expect").map(String::as_str) {
        Some("evidence") => (report.verdict != AttractorVerdict::StrictAttractorEvidence) as u8,
        Some("not-attractor") => (report.verdict != AttractorVerdict::NotStrictAttractor) as u8,
        Some(other) => return Err(format!("unknown expectation `{other}`")),
        None => match report.verdict {
            AttractorVerdict::Inconclusive => 2,
            _ => 0,
        },
    };
    let metric = report.horizon_n0.map(|h| h as f64).unwrap_or(-1.0);
    Ok(Outcome {
        exit_code,
        verdict,
        key_metric: metric,
        result: serde_json::to_value(&report).map_err(|e| e.to_string())?,
        cloud: None,
    })
}

fn stability(config: &RunConfig, system: &circle_ifs::IfsSystem) -> Result<Outcome, String> {
    let epsilon = config.f64("epsilon", 1.0 / 16.0)?;
    let budget = config.u32("budget", 60)?;
    let delta = config.f64("delta", 1.0 / 512.0)?;
    let deletion = config.f64("deletion", 1.0 / 64.0)?;
    let arc_start = config.f64("arc_start", 0.0)?;
    let arcs = [Arc::new(arc_start, deletion)];
    let report = stability_probe(system, epsilon, &arcs, budget, delta);
    let ok = report.violations.is_empty();
    Ok(Outcome {
        exit_code: u8::from(!ok),
        verdict: if ok {
            "stable".into()
        } else {
            "violation".into()
        },
        key_metric: report.empirical_delta.unwrap_or(0.0),
        result: serde_json::to_value(&report).map_err(|e| e.to_string())?,
        cloud: None,
    })
}

fn density(
    config: &RunConfig,
    system: &circle_ifs::IfsSystem,
    transitivity: bool,
) -> Result<Outcome, String> {
    let epsilon = config.f64("epsilon", 1e-2)?;
    let budget = config.u32("budget", 200)?;
    let prune = config.f64("delta", 1e-3)?;
    let target = if config.flag("backward") {
        system.inverse_system().map_err(|e| e.to_string())?
    } else {
        system.clone()
    };
    let searched = if transitivity {
        let arcs = config.usize("arcs", 32)?;
        certify_transitivity(&target, epsilon, arcs, budget, prune)
    } else {
        let grid = config.usize("grid", 64)?;
        certify_minimality(&target, epsilon, grid, budget, prune)
    };
    match searched {
        Ok(cert) => {
            replay_certificate(&target, &cert).map_err(|e| e.to_string())?;
            let witnesses = cert.witnesses.len();
            Ok(Outcome {
                exit_code: 0,
                verdict: "complete".into(),
                key_metric: witnesses as f64,
                result: json!({
                    "certificate_type": "density",
                    "backward": config.flag("backward"),
                    "certificate": cert,
                }),
                cloud: None,
            })
        }
        Err(SemiError::BudgetExhausted { uncovered, partial }) => Ok(Outcome {
            exit_code: 2,
            verdict: "exhausted".into(),
            key_metric: uncovered.len() as f64,
            result: json!({
                "uncovered_pairs": uncovered,
                "partial_witnesses": partial.witnesses.len(),
            }),
            cloud: None,
        }),
        Err(other) => Err(other.to_string()),
    }
}

fn expanding(config: &RunConfig, system: &circle_ifs::IfsSystem) -> Result<Outcome, String> {
    let kappa = config.f64("kappa", 1.2)?;
    let word_depth = config.u32("depth", 24)?;
    let grid = config.usize("grid", 512)?;
    let target = if config.flag("backward") {
        system.inverse_system().map_err(|e| e.to_string())?
    } else {
        system.clone()
    };
    match search_expanding_cover(&target, kappa, word_depth, grid) {
        Ok(cover) => {
            verify_expanding_cover(&target, &cover, grid).map_err(|e| e.to_string())?;
            Ok(Outcome {
                exit_code: 0,
                verdict: "cover-found".into(),
                key_metric: cover.balls.len() as f64,
                result: json!({
                    "certificate_type": "expanding",
                    "backward": config.flag("backward"),
                    "certificate": cover,
                }),
                cloud: None,
            })
        }
        Err(SemiError::NotFound { uncovered_points }) => Ok(Outcome {
            exit_code: 2,
            verdict: "not-found".into(),
            key_metric: uncovered_points.len() as f64,
            result: json!({ "uncovered_points": uncovered_points }),
            cloud: None,
        }),
        Err(other) => Err(other.to_string()),
    }
}

fn blending(config: &RunConfig, system: &circle_ifs::IfsSystem) -> Result<Outcome, String> {
    let region = Arc::new(
        config.f64("region_start", 0.35)?,
        config.f64("region_len", 0.3)?,
    );
    let domain = Arc::new(
        config.f64("domain_start", 1.0 / 3.0)?,
        config.f64("domain_len", 1.0 / 3.0)?,
    );
    let words = parse_words(
        config
            .params
            .get("words")
            .map(String::as_str)
            .unwrap_or("1;2"),
    )?;
    let grid = config.usize("grid", 512)?;
    match verify_blending(system, region, domain, &words, grid) {
        Ok(cert) => {
            // optionally steer a word onto a target point inside the region
            let target_word = match config.params.get("target") {
                Some(t) => {
                    let target: f64 = t.parse().map_err(|e| format!("target: {e}"))?;
                    let tol = config.f64("tol", 1e-3)?;
                    let word = target_word_search(system, &cert, CirclePoint::new(target), tol)
                        .map_err(|e| e.to_string())?;
                    Some(word)
                }
                None => None,
            };
            Ok(Outcome {
                exit_code: 0,
                verdict: "blending".into(),
                key_metric: cert.contraction_beta,
                result: json!({
                    "certificate_type": "blending",
                    "certificate": cert,
                    "target_word": target_word,
                }),
                cloud: None,
            })
        }
        Err(e @ (SemiError::CoverFails { .. } | SemiError::NotContracting { .. })) => Ok(Outcome {
            exit_code: 1,
            verdict: "rejected".into(),
            key_metric: 0.0,
            result: json!({ "reason": e.to_string() }),
            cloud: None,
        }),
        Err(other) => Err(other.to_string()),
    }
}

fn parse_words(raw: &str) -> Result<Vec<Word>, String> {
    raw.split(';')
        .map(|w| {
            w.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as u8)
                        .ok_or_else(|| format!("bad symbol `{c}` in word `{w}`"))
                })
                .collect::<Result<Vec<u8>, String>>()
                .map(Word::forward)
        })
        .collect()
}

fn bootstrap(config: &RunConfig, system: &circle_ifs::IfsSystem) -> Result<Outcome, String> {
    let epsilon = config.f64("epsilon", 0.05)?;
    let kappa = config.f64("kappa", 1.2)?;
    let rounds = config.u32("rounds", 5)?;
    let grid = config.usize("grid", 16)?;
    let budget = config.u32("budget", 200)?;
    let prune = config.f64("delta", 1e-3)?;
    let cover = match search_expanding_cover(system, kappa, config.u32("depth", 128)?, 512) {
        Ok(c) => c,
        Err(SemiError::NotFound { uncovered_points }) => {
            return Ok(Outcome {
                exit_code: 2,
                verdict: "no-expanding-cover".into(),
                key_metric: uncovered_points.len() as f64,
                result: json!({ "uncovered_points": uncovered_points }),
                cloud: None,
            })
        }
        Err(e) => return Err(e.to_string()),
    };
    let base = match certify_minimality(system, epsilon, grid, budget, prune) {
        Ok(c) => c,
        Err(SemiError::BudgetExhausted { uncovered, .. }) => {
            return Ok(Outcome {
                exit_code: 2,
                verdict: "base-certificate-exhausted".into(),
                key_metric: uncovered.len() as f64,
                result: json!({ "uncovered_pairs": uncovered }),
                cloud: None,
            })
        }
        Err(e) => return Err(e.to_string()),
    };
    let boosted = bootstrap_density(system, &cover, &base, rounds).map_err(|e| e.to_string())?;
    replay_certificate(system, &boosted).map_err(|e| e.to_string())?;
    Ok(Outcome {
        exit_code: 0,
        verdict: "bootstrapped".into(),
        key_metric: boosted.epsilon,
        result: json!({
            "certificate_type": "density",
            "backward": false,
            "rounds": rounds,
            "base_epsilon": epsilon,
            "certificate": boosted,
        }),
        cloud: None,
    })
}

fn iterate(config: &RunConfig, system: &circle_ifs::IfsSystem) -> Result<Outcome, String> {
    let budget = config.u32("budget", 20)?;
    let delta = config.f64("delta", 1.0 / 4096.0)?;
    let start = match config.params.get("start").map(String::as_str) {
        None | Some("endpoints") => PointCloud::new([0.25, 0.5], delta),
        Some("full") => PointCloud::full_circle_net(delta),
        Some(other) => {
            let pts: Vec<f64> = other
                .split(',')
                .map(|v| v.parse::<f64>().map_err(|e| format!("start: {e}")))
                .collect::<Result<_, _>>()?;
            PointCloud::new(pts, delta)
        }
    };
    let target = match config.params.get("target").map(String::as_str) {
        Some("cantor") => Some(PointCloud::new(circle_ifs::catalog::cantor_net(20), delta)),
        Some("full") => Some(PointCloud::full_circle_net(delta)),
        None | Some("previous") => None,
        Some(other) => return Err(format!("unknown target `{other}`")),
    };
    match iterate_to_attractor(system, &start, budget, target.as_ref()) {
        Ok(trajectory) => {
            let last = trajectory.last().map(|&(_, d)| d).unwrap_or(f64::NAN);
            Ok(Outcome {
                exit_code: 0,
                verdict: "converged".into(),
                key_metric: last,
                result: json!({ "trajectory": trajectory }),
                cloud: Some(trajectory.iter().map(|&(_, d)| d).collect()),
            })
        }
        Err(HyperError::BudgetExhausted { trajectory }) => {
            let last = trajectory.last().map(|&(_, d)| d).unwrap_or(f64::NAN);
            Ok(Outcome {
                exit_code: 2,
                verdict: "budget-exhausted".into(),
                key_metric: last,
                result: json!({ "trajectory": trajectory }),
                cloud: Some(trajectory.iter().map(|&(_, d)| d).collect()),
            })
        }
        Err(other) => Err(other.to_string()),
    }
}

fn conjugacy(config: &RunConfig, system: &circle_ifs::IfsSystem) -> Result<Outcome, String> {
    let trials = config.u32("trials", 1000)?;
    let report = conjugacy_check(system, trials, config.rng_seed).map_err(|e| e.to_string())?;
    let ok = report.max_discrepancy <= 10.0 * circle_ifs::map::TOL_INV;
    Ok(Outcome {
        exit_code: u8::from(!ok),
        verdict: if ok {
            "conjugate".into()
        } else {
            "mismatch".into()
        },
        key_metric: report.max_discrepancy,
        result: serde_json::to_value(&report).map_err(|e| e.to_string())?,
        cloud: None,
    })
}

fn leaf_density(config: &RunConfig, system: &circle_ifs::IfsSystem) -> Result<Outcome, String> {
    let samples = config.u32("samples", 50)?;
    let arc_len = config.f64("arc_len", 1.0 / 16.0)?;
    let max_cyl = config.usize("cyl", 3)?;
    let epsilon = config.f64("epsilon", 1e-2)?;
    let budget = config.u32("budget", 150)?;
    let delta = config.f64("delta", 1.0 / 512.0)?;
    let report = strict_attractor_probe(system, epsilon, &seed_grid(16), budget, delta);
    if report.verdict != AttractorVerdict::StrictAttractorEvidence {
        return Ok(Outcome {
            exit_code: 2,
            verdict: format!("{:?}", report.verdict),
            key_metric: -1.0,
            result: serde_json::to_value(&report).map_err(|e| e.to_string())?,
            cloud: None,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let k = system.k() as u8;
    let mut found = 0u32;
    let mut witnesses = Vec::new();
    for _ in 0..samples {
        let cyl = Cylinder::two_sided(
            (0..rng.gen_range(0..=max_cyl))
                .map(|_| rng.gen_range(1..=k))
                .collect(),
            (0..rng.gen_range(0..=max_cyl))
                .map(|_| rng.gen_range(1..=k))
                .collect(),
        );
        let arc = Arc::new(rng.gen::<f64>(), arc_len);
        let window = SymbolWindow::new(
            (0..8).map(|_| rng.gen_range(1..=k)).collect(),
            (0..8).map(|_| rng.gen_range(1..=k)).collect(),
            TailRule::ConstantSymbol(1),
        );
        let x = CirclePoint::new(rng.gen::<f64>());
        match leaf_density_certify(system, &report, &window, x, &cyl, &arc, 16) {
            Ok(w) => {
                found += 1;
                witnesses.push(w);
            }
            Err(SkewError::SearchExhausted { .. }) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    let all = found == samples;
    Ok(Outcome {
        exit_code: if all { 0 } else { 2 },
        verdict: format!("witnesses-{found}-of-{samples}"),
        key_metric: found as f64,
        result: json!({ "found": found, "samples": samples, "witnesses": witnesses }),
        cloud: None,
    })
}

fn skew_transitivity(
    config: &RunConfig,
    system: &circle_ifs::IfsSystem,
) -> Result<Outcome, String> {
    let samples = config.usize("samples", 50)?;
    let epsilon = config.f64("epsilon", 1.0 / 16.0)?;
    let arcs = config.usize("arcs", 32)?;
    let budget = config.u32("budget", 150)?;
    let prune = config.f64("delta", 1e-3)?;
    let arc_len = config.f64("arc_len", 1.0 / 8.0)?;
    let max_cyl = config.usize("cyl", 2)?;
    let cert = match certify_transitivity(system, epsilon, arcs, budget, prune) {
        Ok(c) => c,
        Err(SemiError::BudgetExhausted { uncovered, .. }) => {
            return Ok(Outcome {
                exit_code: 2,
                verdict: "transitivity-exhausted".into(),
                key_metric: uncovered.len() as f64,
                result: json!({ "uncovered_pairs": uncovered }),
                cloud: None,
            })
        }
        Err(e) => return Err(e.to_string()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let k = system.k() as u8;
    let mut cyl_pairs = Vec::with_capacity(samples);
    let mut arc_pairs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let rand_cyl = |rng: &mut ChaCha8Rng| {
            Cylinder::two_sided(
                (0..rng.gen_range(0..=max_cyl))
                    .map(|_| rng.gen_range(1..=k))
                    .collect(),
                (0..rng.gen_range(0..=max_cyl))
                    .map(|_| rng.gen_range(1..=k))
                    .collect(),
            )
        };
        cyl_pairs.push((rand_cyl(&mut rng), rand_cyl(&mut rng)));
        arc_pairs.push((
            Arc::new(rng.gen::<f64>(), arc_len),
            Arc::new(rng.gen::<f64>(), arc_len),
        ));
    }
    let report = skew_transitivity_check(system, &cert, &cyl_pairs, &arc_pairs)
        .map_err(|e| e.to_string())?;
    let ok = report.failures == 0;
    Ok(Outcome {
        exit_code: u8::from(!ok),
        verdict: format!("failures-{}", report.failures),
        key_metric: report.failures as f64,
        result: serde_json::to_value(&report).map_err(|e| e.to_string())?,
        cloud: None,
    })
}
