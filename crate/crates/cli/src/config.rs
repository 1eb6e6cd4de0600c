//! Run configuration: a single JSON document naming the system, the probe
//! and its parameters, output paths, and the RNG seed every sampling probe
//! draws from.

use circle_ifs::IfsSystem;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const KNOWN_PROBES: &[&str] = &[
    "unstable-leaf",
    "stable-leaf",
    "attractor",
    "stability",
    "minimality",
    "transitivity",
    "expanding",
    "blending",
    "bootstrap",
    "iterate",
    "conjugacy",
    "leaf-density",
    "skew-transitivity",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    /// `catalog:<name>` or `file:<path>` pointing at serialized map specs.
    pub system: String,
    /// Probe name under key `probe` plus flat numeric/string parameters.
    pub params: BTreeMap<String, String>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_csv: Option<String>,
}

impl RunConfig {
    pub fn probe(&self) -> Result<&str, String> {
        let p = self
            .params
            .get("probe")
            .ok_or("missing probe=<name> parameter")?;
        if !KNOWN_PROBES.contains(&p.as_str()) {
            return Err(format!(
                "unknown probe `{p}` (known: {})",
                KNOWN_PROBES.join(", ")
            ));
        }
        Ok(p)
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64, String> {
        match self.params.get(key) {
            Some(v) => v.parse().map_err(|e| format!("parameter {key}: {e}")),
            None => Ok(default),
        }
    }

    pub fn u32(&self, key: &str, default: u32) -> Result<u32, String> {
        match self.params.get(key) {
            Some(v) => v.parse().map_err(|e| format!("parameter {key}: {e}")),
            None => Ok(default),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize, String> {
        match self.params.get(key) {
            Some(v) => v.parse().map_err(|e| format!("parameter {key}: {e}")),
            None => Ok(default),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.params.get(key).map(String::as_str), Some("true" | "1"))
    }

    /// Structural checks rejected at parse time.
    pub fn validate(&self) -> Result<(), String> {
        self.probe()?;
        let epsilon = self.params.get("epsilon");
        let delta = self.params.get("delta");
        if let (Some(e), Some(d)) = (epsilon, delta) {
            let e: f64 = e.parse().map_err(|err| format!("epsilon: {err}"))?;
            let d: f64 = d.parse().map_err(|err| format!("delta: {err}"))?;
            if e <= 2.0 * d {
                return Err(format!(
                    "constraint violated: epsilon ({e}) must exceed 2 * delta ({d})"
                ));
            }
        }
        for key in ["budget", "depth", "grid", "seeds", "trials", "samples"] {
            if let Some(v) = self.params.get(key) {
                let n: i64 = v.parse().map_err(|e| format!("parameter {key}: {e}"))?;
                if n <= 0 {
                    return Err(format!("parameter {key} must be positive, got {n}"));
                }
            }
        }
        Ok(())
    }

    pub fn resolve_system(&self) -> Result<IfsSystem, String> {
        if let Some(name) = self.system.strip_prefix("catalog:") {
            return circle_ifs::catalog::find(name)
                .map(|n| n.system)
                .ok_or_else(|| format!("no catalog entry named `{name}`"));
        }
        if let Some(path) = self.system.strip_prefix("file:") {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            let system: IfsSystem =
                serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
            for map in system.maps() {
                map.validate().map_err(|e| format!("{path}: {e}"))?;
            }
            return Ok(system);
        }
        Err(format!(
            "system `{}` must start with catalog: or file:",
            self.system
        ))
    }
}
