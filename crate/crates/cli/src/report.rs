//! Run reports.
//!
//! Every suite produces one `report.json` with the resolved configuration,
//! a flat metric map, and a pass flag.  Apart from `wallTimeMs`, the file is
//! a pure function of the configuration: metric keys are sorted and all
//! numbers come from deterministic computations.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use tfpsi_core::Result;

use crate::config::ExperimentConfig;

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub suite_name: String,
    pub config_echo: ExperimentConfig,
    pub metrics: BTreeMap<String, f64>,
    pub pass: bool,
    pub wall_time_ms: u64,
}

impl Report {
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("report.json"), text + "\n")?;
        Ok(())
    }
}

/// Accumulates metrics and tolerance verdicts while a suite runs.
#[derive(Debug, Default)]
pub struct Outcome {
    pub metrics: BTreeMap<String, f64>,
    /// Human-readable descriptions of every violated tolerance.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    /// Record `key = value` and require `value <= bound`.
    pub fn check_le(&mut self, key: &str, value: f64, bound: f64) {
        self.set(key, value);
        if !(value <= bound) {
            self.failures
                .push(format!("{key} = {value:.6e} exceeds {bound:.6e}"));
        }
    }

    /// Record `key = value` and require it to be a finite number.
    pub fn check_finite(&mut self, key: &str, value: f64) {
        self.set(key, value);
        if !value.is_finite() {
            self.failures.push(format!("{key} = {value} is not finite"));
        }
    }

    /// Record a boolean metric (1 = ok) and require it to hold.
    pub fn check_flag(&mut self, key: &str, ok: bool) {
        self.set(key, if ok { 1.0 } else { 0.0 });
        if !ok {
            self.failures.push(format!("{key} = 0 (expected 1)"));
        }
    }

    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}
