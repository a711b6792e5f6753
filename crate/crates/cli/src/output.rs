//! CSV tables, pass/fail checks and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Table { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.to_string(), passed, detail }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Free-form lines printed ahead of the check summary.
    pub notes: Vec<String>,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        for n in &self.notes {
            let _ = writeln!(s, "{n}");
        }
        for c in &self.checks {
            let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let _ = writeln!(s, "{}", if self.passed() { "overall: PASS" } else { "overall: FAIL" });
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputChecksum {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub seed_scheme: String,
    pub config: BTreeMap<String, String>,
    pub outputs: Vec<OutputChecksum>,
    pub passed: bool,
}

pub fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write every table, `report.txt` and `manifest.json` into the output
/// directory.
pub fn write_run(cfg: &ExperimentConfig, run: &RunOutput) -> Result<RunManifest, CliError> {
    let dir: &Path = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut outputs = Vec::new();
    let mut files: Vec<(String, String)> = run.tables.iter().map(|t| (format!("{}.csv", t.name), t.to_csv())).collect();
    files.push(("report.txt".into(), run.report()));
    for (name, body) in &files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        outputs.push(OutputChecksum { file: name.clone(), bytes: body.len(), sha256: checksum(body.as_bytes()) });
    }
    let manifest = RunManifest {
        artifact: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        seed_scheme: "per-trial seed = splitmix64 mix of (master_seed, stream, trial index)".into(),
        config: cfg.echo(),
        outputs,
        passed: run.passed(),
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}
