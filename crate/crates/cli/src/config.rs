//! Flat `key = value` experiment configuration. Keys left out take the
//! preset for the chosen experiment; command-line flags override the file.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use qnpr_core::encoding::{EncodingKind, EncodingSpec};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    EntropyScan,
    Fig3bScan,
    VerifyInversion,
    Predict,
    IonVerify,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::EntropyScan => "entropy_scan",
            Experiment::Fig3bScan => "fig3b_scan",
            Experiment::VerifyInversion => "verify_inversion",
            Experiment::Predict => "predict",
            Experiment::IonVerify => "ion_verify",
        }
    }
}

impl FromStr for Experiment {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.replace('-', "_").as_str() {
            "entropy_scan" => Ok(Experiment::EntropyScan),
            "fig3b_scan" => Ok(Experiment::Fig3bScan),
            "verify_inversion" => Ok(Experiment::VerifyInversion),
            "predict" => Ok(Experiment::Predict),
            "ion_verify" => Ok(Experiment::IonVerify),
            other => Err(CliError::Config(format!("unknown experiment {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Synthetic { seed: u64, samples: usize, features: usize, noise: f64 },
    /// CSV with a header row; `target` is a column name or zero-based index.
    Csv { path: PathBuf, target: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dataset: DataSource,
    pub standardize: bool,
    pub encoding: EncodingSpec,
    pub chi: f64,
    pub s_values: Vec<f64>,
    pub chi_values: Vec<f64>,
    pub sample_counts: Vec<usize>,
    pub train_count: usize,
    pub test_count: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub copies: Vec<usize>,
    pub subset_sizes: Vec<usize>,
    pub bins: usize,
    pub coupling: f64,
    pub shots: u64,
    pub grid_points: usize,
    pub width_factor: f64,
}

impl ExperimentConfig {
    pub fn preset(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            dataset: DataSource::Synthetic { seed: 1, samples: 40, features: 2, noise: 0.1 },
            standardize: true,
            encoding: EncodingSpec::coherent(),
            chi: 0.1,
            s_values: vec![2.0],
            chi_values: vec![0.1],
            sample_counts: vec![8],
            train_count: 12,
            test_count: 8,
            trials: 1,
            master_seed: 2024,
            output_dir: PathBuf::from(format!("out/{}", experiment.name())),
            copies: vec![1],
            subset_sizes: vec![1],
            bins: 65,
            coupling: 1.0,
            shots: 100_000,
            grid_points: 257,
            width_factor: 6.0,
        };
        match experiment {
            Experiment::EntropyScan => ExperimentConfig {
                dataset: DataSource::Synthetic { seed: 7, samples: 240, features: 3, noise: 0.1 },
                encoding: EncodingSpec::squeezed(1.0).expect("positive scale"),
                s_values: vec![0.25, 0.5, 1.0],
                sample_counts: vec![2, 4, 8, 16, 32, 64, 128],
                test_count: 100,
                trials: 40,
                chi: 0.01,
                ..base
            },
            Experiment::Fig3bScan => ExperimentConfig {
                dataset: DataSource::Synthetic { seed: 11, samples: 12, features: 2, noise: 0.1 },
                train_count: 4,
                test_count: 8,
                s_values: vec![1.5],
                chi: 0.5,
                trials: 100,
                copies: (1..=20).collect(),
                subset_sizes: vec![1, 2, 3, 4],
                ..base
            },
            Experiment::VerifyInversion => ExperimentConfig {
                dataset: DataSource::Synthetic { seed: 3, samples: 6, features: 2, noise: 0.1 },
                train_count: 6,
                test_count: 0,
                s_values: vec![1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
                chi_values: vec![0.0, 0.1, 1.0],
                ..base
            },
            Experiment::Predict => ExperimentConfig {
                dataset: DataSource::Synthetic { seed: 5, samples: 20, features: 2, noise: 0.1 },
                ..base
            },
            Experiment::IonVerify => base,
        }
    }

    /// Parse a config file over the preset of the experiment it names (or
    /// of `default_experiment` when it names none).
    pub fn parse(text: &str, default_experiment: Experiment) -> Result<Self, CliError> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let experiment = match pairs.iter().find(|(k, _)| k == "experiment") {
            Some((_, v)) => v.parse()?,
            None => default_experiment,
        };
        let mut cfg = ExperimentConfig::preset(experiment);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Config(format!("{key}: invalid {what} {value:?}"));
        match key {
            "experiment" => {
                let e: Experiment = value.parse()?;
                if e != self.experiment {
                    return Err(CliError::Config(format!(
                        "config is for {} but {} was requested",
                        e.name(),
                        self.experiment.name()
                    )));
                }
            }
            "dataset" => {
                self.dataset = if value == "synthetic" {
                    match &self.dataset {
                        DataSource::Synthetic { .. } => self.dataset.clone(),
                        DataSource::Csv { .. } => DataSource::Synthetic { seed: 1, samples: 40, features: 2, noise: 0.1 },
                    }
                } else {
                    let target = match &self.dataset {
                        DataSource::Csv { target, .. } => target.clone(),
                        DataSource::Synthetic { .. } => "MEDV".to_string(),
                    };
                    DataSource::Csv { path: PathBuf::from(value), target }
                }
            }
            "target" => match &mut self.dataset {
                DataSource::Csv { target, .. } => *target = value.to_string(),
                DataSource::Synthetic { .. } => {
                    return Err(CliError::Config("target needs a CSV dataset; set dataset first".into()))
                }
            },
            "synthetic_seed" | "synthetic_samples" | "synthetic_features" | "synthetic_noise" => {
                let DataSource::Synthetic { seed, samples, features, noise } = &mut self.dataset else {
                    return Err(CliError::Config(format!("{key} needs a synthetic dataset")));
                };
                match key {
                    "synthetic_seed" => *seed = value.parse().map_err(|_| bad("integer"))?,
                    "synthetic_samples" => *samples = value.parse().map_err(|_| bad("integer"))?,
                    "synthetic_features" => *features = value.parse().map_err(|_| bad("integer"))?,
                    _ => *noise = value.parse().map_err(|_| bad("number"))?,
                }
            }
            "standardize" => self.standardize = value.parse().map_err(|_| bad("boolean"))?,
            "encoding" => {
                let kind: EncodingKind = value.parse().map_err(|_| bad("encoding"))?;
                self.encoding = EncodingSpec::new(kind, self.encoding.scale)?;
            }
            "encoding_scale" => {
                let scale = value.parse().map_err(|_| bad("number"))?;
                self.encoding = EncodingSpec::new(self.encoding.kind, scale)?;
            }
            "chi" => self.chi = value.parse().map_err(|_| bad("number"))?,
            "s" => self.s_values = parse_list(value).map_err(|_| bad("list"))?,
            "chi_values" => self.chi_values = parse_list(value).map_err(|_| bad("list"))?,
            "sample_counts" => self.sample_counts = parse_list(value).map_err(|_| bad("list"))?,
            "train_count" => self.train_count = value.parse().map_err(|_| bad("integer"))?,
            "test_count" => self.test_count = value.parse().map_err(|_| bad("integer"))?,
            "trials" => self.trials = value.parse().map_err(|_| bad("integer"))?,
            "seed" => self.master_seed = value.parse().map_err(|_| bad("integer"))?,
            "out" => self.output_dir = PathBuf::from(value),
            "copies" => self.copies = parse_range_list(value).map_err(|_| bad("list"))?,
            "subset_sizes" => self.subset_sizes = parse_range_list(value).map_err(|_| bad("list"))?,
            "bins" => self.bins = value.parse().map_err(|_| bad("integer"))?,
            "coupling" => self.coupling = value.parse().map_err(|_| bad("number"))?,
            "shots" => self.shots = value.parse().map_err(|_| bad("integer"))?,
            "grid_points" => self.grid_points = value.parse().map_err(|_| bad("integer"))?,
            "width_factor" => self.width_factor = value.parse().map_err(|_| bad("number"))?,
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let empty = |name: &str| Err(CliError::Config(format!("{name} must not be empty")));
        if self.s_values.is_empty() {
            return empty("s");
        }
        if self.chi_values.is_empty() {
            return empty("chi_values");
        }
        if self.sample_counts.is_empty() {
            return empty("sample_counts");
        }
        if self.copies.is_empty() {
            return empty("copies");
        }
        if self.subset_sizes.is_empty() {
            return empty("subset_sizes");
        }
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        if self.bins == 0 {
            return Err(CliError::Config("bins must be at least 1".into()));
        }
        Ok(())
    }

    /// Every effective setting, for the manifest.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let ulist = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut m = BTreeMap::new();
        m.insert("experiment".into(), self.experiment.name().into());
        match &self.dataset {
            DataSource::Synthetic { seed, samples, features, noise } => {
                m.insert("dataset".into(), "synthetic".into());
                m.insert("synthetic_seed".into(), seed.to_string());
                m.insert("synthetic_samples".into(), samples.to_string());
                m.insert("synthetic_features".into(), features.to_string());
                m.insert("synthetic_noise".into(), noise.to_string());
            }
            DataSource::Csv { path, target } => {
                m.insert("dataset".into(), path.display().to_string());
                m.insert("target".into(), target.clone());
            }
        }
        m.insert("standardize".into(), self.standardize.to_string());
        m.insert("encoding".into(), self.encoding.kind.to_string());
        m.insert("encoding_scale".into(), self.encoding.scale.to_string());
        m.insert("chi".into(), self.chi.to_string());
        m.insert("s".into(), list(&self.s_values));
        m.insert("chi_values".into(), list(&self.chi_values));
        m.insert("sample_counts".into(), ulist(&self.sample_counts));
        m.insert("train_count".into(), self.train_count.to_string());
        m.insert("test_count".into(), self.test_count.to_string());
        m.insert("trials".into(), self.trials.to_string());
        m.insert("seed".into(), self.master_seed.to_string());
        m.insert("out".into(), self.output_dir.display().to_string());
        m.insert("copies".into(), ulist(&self.copies));
        m.insert("subset_sizes".into(), ulist(&self.subset_sizes));
        m.insert("bins".into(), self.bins.to_string());
        m.insert("coupling".into(), self.coupling.to_string());
        m.insert("shots".into(), self.shots.to_string());
        m.insert("grid_points".into(), self.grid_points.to_string());
        m.insert("width_factor".into(), self.width_factor.to_string());
        m
    }
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, ()> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| ()))
        .collect()
}

/// Comma list whose items may be inclusive ranges `a..b`.
fn parse_range_list(value: &str) -> Result<Vec<usize>, ()> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.parse().map_err(|_| ())?, b.parse().map_err(|_| ())?);
                if a > b {
                    return Err(());
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(|_| ())?),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_override_preset() {
        let cfg = ExperimentConfig::parse(
            "experiment = fig3b_scan\n# comment\ntrials = 7\ncopies = 1..3, 10\ns = 1.25\n",
            Experiment::Predict,
        )
        .unwrap();
        assert_eq!(cfg.experiment, Experiment::Fig3bScan);
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.copies, vec![1, 2, 3, 10]);
        assert_eq!(cfg.s_values, vec![1.25]);
        assert_eq!(cfg.subset_sizes, vec![1, 2, 3, 4]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("nonsense", Experiment::Predict).is_err());
        assert!(ExperimentConfig::parse("color = red", Experiment::Predict).is_err());
        assert!(ExperimentConfig::parse("trials = 0", Experiment::Predict).is_err());
        assert!(ExperimentConfig::parse("s = ", Experiment::Predict).is_err());
        assert!(ExperimentConfig::parse("target = MEDV", Experiment::Predict).is_err());
        assert!("warp".parse::<Experiment>().is_err());
    }

    #[test]
    fn csv_source_and_target() {
        let cfg = ExperimentConfig::parse("dataset = data/boston.csv\ntarget = 13\n", Experiment::EntropyScan).unwrap();
        assert_eq!(cfg.dataset, DataSource::Csv { path: "data/boston.csv".into(), target: "13".into() });
        assert_eq!(cfg.echo()["target"], "13");
    }

    #[test]
    fn presets_are_valid() {
        for e in [
            Experiment::EntropyScan,
            Experiment::Fig3bScan,
            Experiment::VerifyInversion,
            Experiment::Predict,
            Experiment::IonVerify,
        ] {
            ExperimentConfig::preset(e).validate().unwrap();
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }
}
