//! End-to-end command-line behavior: exit codes, report round trips,
//! certificate replay, and file-based system loading.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_circle-ifs")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("circle-ifs-cli-test-{}-{name}", std::process::id()))
}

#[test]
fn catalog_list_names_every_entry() {
    let out = run(&["catalog", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "single-rotation",
        "two-rotations",
        "rotation+morse-smale",
        "cantor-group-instance",
        "cantor-preserving",
        "cantor-preserving+h",
    ] {
        assert!(text.contains(name), "missing {name} in listing");
    }
}

#[test]
fn leaf_run_reports_and_replays() {
    let report = temp("leaf.json");
    let csv = temp("leaf.csv");
    let out = run(&[
        "run",
        "catalog:two-rotations",
        "probe=unstable-leaf",
        "depth=20",
        "--out",
        report.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    // projection CSV: header plus two 17-significant-digit rows
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = csv_text.trim_end().split("\r\n").collect();
    assert_eq!(lines[0], "point");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("5.000000000000000"), "{}", lines[2]);
    // the report replays
    let verify = run(&["verify", report.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0));
    let _ = std::fs::remove_file(&report);
    let _ = std::fs::remove_file(&csv);
}

#[test]
fn tampered_certificate_fails_verification_with_exit_one() {
    let report = temp("tamper.json");
    let out = run(&[
        "run",
        "catalog:two-rotations",
        "probe=minimality",
        "epsilon=0.1",
        "grid=4",
        "budget=200",
        "delta=0.001",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    doc["payload"]["result"]["certificate"]["witnesses"][0]["word"]["symbols"] =
        serde_json::json!([1, 1, 2, 2, 1, 1, 2]);
    std::fs::write(&report, doc.to_string()).unwrap();
    let verify = run(&["verify", report.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&verify.stderr);
    assert!(
        stderr.contains("seed 0") || stderr.contains("witness"),
        "{stderr}"
    );
    let _ = std::fs::remove_file(&report);
}

#[test]
fn constraint_violations_exit_three() {
    // epsilon must exceed twice delta
    let out = run(&[
        "run",
        "catalog:two-rotations",
        "probe=attractor",
        "epsilon=0.001",
        "delta=0.01",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("epsilon"), "{stderr}");
    // unknown probe names are rejected at parse time
    let out = run(&["run", "catalog:two-rotations", "probe=nonsense"]);
    assert_eq!(out.status.code(), Some(3));
    // empty sweep values
    let out = run(&[
        "sweep",
        "catalog:two-rotations",
        "probe=iterate",
        "param=budget",
        "values=",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn expected_verdict_mismatch_exits_one() {
    let out = run(&[
        "run",
        "catalog:two-rotations",
        "probe=attractor",
        "expect=evidence",
        "budget=30",
        "seeds=4",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn budget_exhaustion_exits_two() {
    // a single irrational rotation cannot certify density at depth 3
    let out = run(&[
        "run",
        "catalog:single-rotation",
        "probe=minimality",
        "epsilon=0.05",
        "grid=2",
        "budget=3",
        "delta=0.001",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn file_system_loads_and_runs() {
    let path = temp("system.json");
    let named = circle_ifs::catalog::make_two_rotations(2f64.sqrt() - 1.0, 1, 2);
    std::fs::write(&path, serde_json::to_string(&named.system).unwrap()).unwrap();
    let spec = format!("file:{}", path.display());
    let out = run(&["run", &spec, "probe=unstable-leaf", "depth=10"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let _ = std::fs::remove_file(&path);
}

#[test]
fn config_file_drives_a_run() {
    let cfg_path = temp("config.json");
    let report = temp("config-report.json");
    let cfg = serde_json::json!({
        "system": "catalog:two-rotations",
        "params": {"probe": "conjugacy", "trials": "100"},
        "rng_seed": 11,
        "output_report": report.to_str().unwrap(),
    });
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    let out = run(&["run", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["payload"]["config"]["rng_seed"], 11);
    assert_eq!(doc["payload"]["verdict"], "conjugate");
    let _ = std::fs::remove_file(&cfg_path);
    let _ = std::fs::remove_file(&report);
}

#[test]
fn sweep_writes_rfc4180_table() {
    let csv = temp("sweep.csv");
    let out = run(&[
        "sweep",
        "catalog:cantor-group-instance",
        "probe=iterate",
        "target=cantor",
        "param=budget",
        "values=1,2,3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.trim_end().split("\r\n").collect();
    assert_eq!(lines[0], "value,verdict,metric");
    assert_eq!(lines.len(), 4);
    // distances shrink by roughly one third per extra step
    let metric = |line: &str| -> f64 { line.split(',').nth(2).unwrap().parse().unwrap() };
    assert!(metric(lines[2]) < metric(lines[1]));
    assert!(metric(lines[3]) < metric(lines[2]));
    let _ = std::fs::remove_file(&csv);
}
