//! Command-line front end: load a system (catalog name, file, or inline
//! JSON), run a probe, and emit a deterministic JSON report plus optional
//! CSV point clouds. `verify` replays certificate-bearing reports.
//!
//! Exit codes: 0 expected verdict, 1 unexpected verdict or failed replay,
//! 2 search/iteration budget exhausted, 3 invalid input.

use std::collections::BTreeMap;
use std::process::ExitCode;

mod config;
mod probes;
mod report;

use config::RunConfig;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = dispatch(&args).unwrap_or_else(|err| {
        eprintln!("error: {err}");
        3
    });
    ExitCode::from(code)
}

fn dispatch(args: &[String]) -> Result<u8, String> {
    match args.first().map(String::as_str) {
        Some("run") => cmd_run(&args[1..]),
        Some("sweep") => cmd_sweep(&args[1..]),
        Some("verify") => cmd_verify(&args[1..]),
        Some("catalog") => match args.get(1).map(String::as_str) {
            Some("list") => cmd_catalog_list(),
            Some("run") => cmd_catalog_run(&args[2..]),
            _ => Err("usage: catalog list | catalog run <name>".into()),
        },
        Some("help") | None => {
            print_usage();
            Ok(0)
        }
        Some(other) => Err(format!("unknown subcommand `{other}`")),
    }
}

fn print_usage() {
    println!(
        "usage:\n  \
         circle-ifs run <system> probe=<name> [key=value ...] [--out FILE] [--csv FILE]\n  \
         circle-ifs run --config FILE\n  \
         circle-ifs sweep <system> probe=<name> param=<key> values=v1,v2,.. [key=value ...] [--out FILE]\n  \
         circle-ifs verify <report.json>\n  \
         circle-ifs catalog list\n  \
         circle-ifs catalog run <name>\n\n\
         systems: catalog:<name> | file:<maps.json>\n\
         probes: unstable-leaf stable-leaf attractor stability minimality transitivity\n         \
         expanding blending bootstrap iterate conjugacy leaf-density skew-transitivity"
    );
}

fn cmd_run(args: &[String]) -> Result<u8, String> {
    let config = parse_run_args(args)?;
    let started = std::time::Instant::now();
    let outcome = probes::execute(&config)?;
    report::emit(&config, &outcome, started.elapsed())?;
    Ok(outcome.exit_code)
}

fn cmd_sweep(args: &[String]) -> Result<u8, String> {
    let mut base = parse_run_args(args)?;
    let param = base
        .params
        .remove("param")
        .ok_or("sweep needs param=<key>")?;
    let values_raw = base
        .params
        .remove("values")
        .ok_or("sweep needs values=v1,v2,..")?;
    let values: Vec<f64> = values_raw
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad value `{v}`: {e}"))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err("empty sweep values".into());
    }
    let mut rows = Vec::new();
    let mut worst: u8 = 0;
    for v in values {
        let mut cfg = base.clone();
        cfg.params.insert(param.clone(), format_value(v));
        let outcome = probes::execute(&cfg)?;
        worst = worst.max(outcome.exit_code);
        rows.push((v, outcome.verdict.clone(), outcome.key_metric));
    }
    let mut csv = String::from("value,verdict,metric\r\n");
    for (v, verdict, metric) in rows {
        csv.push_str(&format!(
            "{},{},{}\r\n",
            report::fmt_f64(v),
            verdict,
            report::fmt_f64(metric)
        ));
    }
    match base.output_csv.as_ref().or(base.output_report.as_ref()) {
        Some(path) => std::fs::write(path, csv).map_err(|e| e.to_string())?,
        None => print!("{csv}"),
    }
    Ok(worst)
}

fn format_value(v: f64) -> String {
    // integral values print without a decimal point so count-valued
    // parameters still parse; floats round-trip exactly
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn cmd_verify(args: &[String]) -> Result<u8, String> {
    let path = args.first().ok_or("usage: verify <report.json>")?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
    match report::verify_report(&doc) {
        Ok(summary) => {
            println!("verified: {summary}");
            Ok(0)
        }
        Err(report::VerifyFailure::Witness(detail)) => {
            eprintln!("witness replay failed: {detail}");
            Ok(1)
        }
        Err(report::VerifyFailure::Input(detail)) => Err(detail),
    }
}

fn cmd_catalog_list() -> Result<u8, String> {
    for entry in circle_ifs::catalog::catalog() {
        println!(
            "{:<24} k={:<2} {}",
            entry.name,
            entry.system.k(),
            entry.provenance
        );
        for w in &entry.warnings {
            println!("    warning: {w}");
        }
    }
    Ok(0)
}

fn cmd_catalog_run(args: &[String]) -> Result<u8, String> {
    let name = args.first().ok_or("usage: catalog run <name>")?;
    let entry = circle_ifs::catalog::find(name)
        .ok_or_else(|| format!("no catalog entry named `{name}`"))?;
    let mut failures = 0usize;
    for (i, exp) in entry.expected.iter().enumerate() {
        let started = std::time::Instant::now();
        match circle_ifs::catalog::run_expectation(&entry, exp) {
            Ok(()) => println!(
                "PASS [{i}] {} ({} ms)",
                variant_name(exp),
                started.elapsed().as_millis()
            ),
            Err(e) => {
                failures += 1;
                println!("FAIL [{i}] {}: {e}", variant_name(exp));
            }
        }
    }
    Ok(if failures == 0 { 0 } else { 1 })
}

fn variant_name(exp: &circle_ifs::catalog::Expectation) -> String {
    let json = serde_json::to_value(exp).unwrap_or_default();
    match json {
        serde_json::Value::Object(map) => map.keys().next().cloned().unwrap_or_default(),
        _ => String::from("expectation"),
    }
}

fn parse_run_args(args: &[String]) -> Result<RunConfig, String> {
    let mut system_spec: Option<String> = None;
    let mut params: BTreeMap<String, String> = BTreeMap::new();
    let mut output_report = None;
    let mut output_csv = None;
    let mut config_path = None;
    let mut it = args.iter().peekable();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--config" => config_path = Some(it.next().ok_or("--config needs a path")?.clone()),
            "--out" => output_report = Some(it.next().ok_or("--out needs a path")?.clone()),
            "--csv" => output_csv = Some(it.next().ok_or("--csv needs a path")?.clone()),
            other if other.contains('=') => {
                let (k, v) = other.split_once('=').unwrap();
                params.insert(k.to_string(), v.to_string());
            }
            other if system_spec.is_none() => system_spec = Some(other.to_string()),
            other => return Err(format!("unexpected argument `{other}`")),
        }
    }
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
        // command-line params override the file
        cfg.params.extend(params);
        if output_report.is_some() {
            cfg.output_report = output_report;
        }
        if output_csv.is_some() {
            cfg.output_csv = output_csv;
        }
        cfg.validate()?;
        return Ok(cfg);
    }
    let system = system_spec.ok_or("missing system (catalog:<name> or file:<path>)")?;
    let cfg = RunConfig {
        system,
        rng_seed: params
            .get("rng_seed")
            .map(|s| s.parse::<u64>().map_err(|e| e.to_string()))
            .transpose()?
            .unwrap_or(0),
        params,
        output_report,
        output_csv,
    };
    cfg.validate()?;
    Ok(cfg)
}
