//! Experiment harness: configuration, seeded runs and CSV plus manifest
//! output for the `qnpr` command.

use std::path::Path;

use thiserror::Error;

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{DataSource, Experiment, ExperimentConfig};
pub use output::{write_run, Check, RunManifest, RunOutput, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qnpr_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

/// Run the configured experiment without touching the filesystem beyond
/// reading a CSV dataset.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    match cfg.experiment {
        Experiment::EntropyScan => experiments::run_entropy_scan(cfg),
        Experiment::Fig3bScan => experiments::run_fig3b_scan(cfg),
        Experiment::VerifyInversion => experiments::run_verify_inversion(cfg),
        Experiment::Predict => experiments::run_predict(cfg),
        Experiment::IonVerify => experiments::run_ion_verify(cfg),
    }
}
