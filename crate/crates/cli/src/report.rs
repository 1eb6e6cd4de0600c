//! Report emission and certificate replay. The `payload` object is fully
//! determined by the run configuration (keys sorted, floats via shortest
//! round-trip formatting), so identical configs produce byte-identical
//! payloads; wall-clock timing lives in a sibling field.

use crate::config::RunConfig;
use crate::probes::Outcome;
use serde_json::{json, Value};
use std::time::Duration;

/// 17-significant-digit decimal for CSV cells.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn emit(config: &RunConfig, outcome: &Outcome, elapsed: Duration) -> Result<(), String> {
    let payload = json!({
        "config": config,
        "verdict": outcome.verdict,
        "metric": outcome.key_metric,
        "result": outcome.result,
    });
    let doc = json!({
        "elapsed_ms": elapsed.as_millis() as u64,
        "payload": payload,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
    match &config.output_report {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{path}: {e}"))?,
        None => println!("{text}"),
    }
    if let Some(path) = &config.output_csv {
        if let Some(points) = &outcome.cloud {
            let mut csv = String::from("point\r\n");
            for p in points {
                csv.push_str(&fmt_f64(*p));
                csv.push_str("\r\n");
            }
            std::fs::write(path, csv).map_err(|e| format!("{path}: {e}"))?;
        } else {
            eprintln!("note: probe produced no point cloud; skipping {path}");
        }
    }
    eprintln!(
        "{}: {} (metric {}) in {} ms",
        config
            .params
            .get("probe")
            .map(String::as_str)
            .unwrap_or("?"),
        outcome.verdict,
        outcome.key_metric,
        elapsed.as_millis()
    );
    Ok(())
}

pub enum VerifyFailure {
    /// A witness failed to replay: exit code 1.
    Witness(String),
    /// The file is not a verifiable report: exit code 3.
    Input(String),
}

/// Replay the certificate embedded in a report file against the system its
/// own config names.
pub fn verify_report(doc: &Value) -> Result<String, VerifyFailure> {
    let payload = doc
        .get("payload")
        .ok_or_else(|| VerifyFailure::Input("report has no payload".into()))?;
    let config: RunConfig = serde_json::from_value(
        payload
            .get("config")
            .cloned()
            .ok_or_else(|| VerifyFailure::Input("payload has no config".into()))?,
    )
    .map_err(|e| VerifyFailure::Input(format!("bad embedded config: {e}")))?;
    let system = config.resolve_system().map_err(VerifyFailure::Input)?;
    let result = payload
        .get("result")
        .ok_or_else(|| VerifyFailure::Input("payload has no result".into()))?;
    let kind = result
        .get("certificate_type")
        .and_then(Value::as_str)
        .ok_or_else(|| VerifyFailure::Input("result carries no replayable certificate".into()))?;
    let cert_value = result
        .get("certificate")
        .cloned()
        .ok_or_else(|| VerifyFailure::Input("certificate field missing".into()))?;
    match kind {
        "density" => {
            let cert: circle_ifs::semigroup::DensityCertificate =
                serde_json::from_value(cert_value)
                    .map_err(|e| VerifyFailure::Input(e.to_string()))?;
            let backward = result
                .get("backward")
                .and_then(Value::as_bool)
                .unwrap_or(false);
            let target = if backward {
                system
                    .inverse_system()
                    .map_err(|e| VerifyFailure::Input(e.to_string()))?
            } else {
                system
            };
            circle_ifs::semigroup::replay_certificate(&target, &cert)
                .map_err(|e| VerifyFailure::Witness(e.to_string()))?;
            Ok(format!(
                "density certificate, {} witnesses at epsilon {}",
                cert.witnesses.len(),
                cert.epsilon
            ))
        }
        "blending" => {
            let cert: circle_ifs::semigroup::BlendingCertificate =
                serde_json::from_value(cert_value)
                    .map_err(|e| VerifyFailure::Input(e.to_string()))?;
            circle_ifs::semigroup::blend::replay_blending(&system, &cert, 512)
                .map_err(|e| VerifyFailure::Witness(e.to_string()))?;
            Ok(format!(
                "blending certificate, beta {} slack {}",
                cert.contraction_beta, cert.cover_slack
            ))
        }
        "expanding" => {
            let cert: circle_ifs::semigroup::ExpandingCover = serde_json::from_value(cert_value)
                .map_err(|e| VerifyFailure::Input(e.to_string()))?;
            let backward = result
                .get("backward")
                .and_then(Value::as_bool)
                .unwrap_or(false);
            let target = if backward {
                system
                    .inverse_system()
                    .map_err(|e| VerifyFailure::Input(e.to_string()))?
            } else {
                system
            };
            circle_ifs::semigroup::verify_expanding_cover(&target, &cert, 1024)
                .map_err(|e| VerifyFailure::Witness(e.to_string()))?;
            Ok(format!(
                "expanding cover, {} balls at kappa {}",
                cert.balls.len(),
                cert.kappa
            ))
        }
        "leaf" => {
            let report: circle_ifs::skewprod::LeafReport = serde_json::from_value(cert_value)
                .map_err(|e| VerifyFailure::Input(e.to_string()))?;
            report
                .replay(&system)
                .map_err(|e| VerifyFailure::Witness(e.to_string()))?;
            Ok(format!(
                "leaf report, {} witnesses at depth {}",
                report.witnesses.len(),
                report.depth
            ))
        }
        other => Err(VerifyFailure::Input(format!(
            "unknown certificate type `{other}`"
        ))),
    }
}
