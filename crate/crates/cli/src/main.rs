use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qnpr_cli::{run, write_run, CliError, Experiment, ExperimentConfig};

/// Seeded experiments for spectrum-transformed kernel regression.
#[derive(Parser)]
#[command(name = "qnpr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entanglement entropy and test error against training-set size.
    EntropyScan(Flags),
    /// Prediction error against copy count and copy subset size.
    Fig3bScan(Flags),
    /// Grid against closed-form post-selection, and success-rate scaling.
    VerifyInversion(Flags),
    /// Classical and simulated quantum predictions per test point.
    Predict(Flags),
    /// Trapped-ion gate construction convergence.
    IonVerify(Flags),
}

/// Flags override values from `--config`, which override the preset.
#[derive(Args)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
}

fn build_config(experiment: Experiment, flags: &Flags) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
            ExperimentConfig::parse(&text, experiment)?
        }
        None => ExperimentConfig::preset(experiment),
    };
    if cfg.experiment != experiment {
        return Err(CliError::Config(format!(
            "config is for {} but {} was requested",
            cfg.experiment.name(),
            experiment.name()
        )));
    }
    if let Some(seed) = flags.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &flags.out {
        cfg.output_dir = out.clone();
    }
    if let Some(trials) = flags.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    // Exit code 2 is reserved for tolerance failures.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (experiment, flags) = match &cli.command {
        Command::EntropyScan(f) => (Experiment::EntropyScan, f),
        Command::Fig3bScan(f) => (Experiment::Fig3bScan, f),
        Command::VerifyInversion(f) => (Experiment::VerifyInversion, f),
        Command::Predict(f) => (Experiment::Predict, f),
        Command::IonVerify(f) => (Experiment::IonVerify, f),
    };
    let result = build_config(experiment, flags).and_then(|cfg| {
        let out = run(&cfg)?;
        write_run(&cfg, &out)?;
        Ok((cfg, out))
    });
    match result {
        Ok((cfg, out)) => {
            print!("{}", out.report());
            println!("outputs in {}", cfg.output_dir.display());
            if out.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
