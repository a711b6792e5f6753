//! Tabular regression data: CSV loading, a seeded synthetic generator,
//! z-scoring and seeded train/test splits.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};

/// Labeled samples, one row of `features` per target.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: DMatrix<f64>,
    pub targets: DVector<f64>,
    pub feature_names: Vec<String>,
    pub standardized: bool,
}

/// How to locate the target column in a CSV header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TargetColumn {
    Name(String),
    Index(usize),
}

impl From<&str> for TargetColumn {
    fn from(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => TargetColumn::Index(i),
            Err(_) => TargetColumn::Name(s.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitSpec {
    pub train_count: usize,
    pub test_count: usize,
    pub seed: u64,
}

impl Dataset {
    pub fn new(
        features: DMatrix<f64>,
        targets: DVector<f64>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                got: targets.len(),
            });
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::DimensionMismatch {
                expected: features.ncols(),
                got: feature_names.len(),
            });
        }
        Ok(Dataset {
            features,
            targets,
            feature_names,
            standardized: false,
        })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Number of features per sample.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn sample(&self, i: usize) -> DVector<f64> {
        self.features.row(i).transpose()
    }

    /// Rows `indices`, in order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let features = self.features.select_rows(indices);
        let targets = DVector::from_iterator(indices.len(), indices.iter().map(|&i| self.targets[i]));
        Dataset {
            features,
            targets,
            feature_names: self.feature_names.clone(),
            standardized: self.standardized,
        }
    }
}

/// Read a headed, comma-separated file. Every non-target column becomes a
/// feature. Row numbers in errors count data rows from 1.
pub fn load_csv(path: impl AsRef<Path>, target: &TargetColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, target)
}

/// Same as [`load_csv`] over any reader.
pub fn read_csv<R: std::io::Read>(reader: R, target: &TargetColumn) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let target_idx = match target {
        TargetColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingTarget(name.clone()))?,
        TargetColumn::Index(i) if *i < header.len() => *i,
        TargetColumn::Index(i) => return Err(Error::MissingTarget(i.to_string())),
    };
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != target_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut values = Vec::new();
    let mut targets = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != header.len() {
            return Err(Error::DimensionMismatch {
                expected: header.len(),
                got: record.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row,
                column: header[j].clone(),
                value: cell.to_string(),
            })?;
            if j == target_idx {
                targets.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let m = targets.len();
    let features = DMatrix::from_row_slice(m, feature_names.len(), &values);
    Dataset::new(features, DVector::from_vec(targets), feature_names)
}

/// Smooth nonlinear response used by [`synthesize`].
fn response(x: &[f64]) -> f64 {
    let n = x.len();
    let mut y = 0.0;
    for j in 0..n {
        y += (1.5 * x[j]).sin();
    }
    if n > 1 {
        for j in 0..n {
            y += 0.5 * x[j] * x[(j + 1) % n] / n as f64;
        }
    }
    y
}

/// Standard-normal features with targets `response(x) + N(0, noise_sd²)`.
pub fn synthesize(seed: u64, m: usize, n: usize, noise_sd: f64) -> Result<Dataset> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "synthesize needs M >= 1 and N >= 1 (got M={m}, N={n})"
        )));
    }
    if !(noise_sd >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise_sd must be >= 0, got {noise_sd}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
    let noise = Normal::new(0.0, noise_sd).expect("finite sd");
    let targets = DVector::from_fn(m, |i, _| {
        let row: Vec<f64> = features.row(i).iter().copied().collect();
        let eps = if noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };
        response(&row) + eps
    });
    let names = (0..n).map(|j| format!("x{j}")).collect();
    Dataset::new(features, targets, names)
}

/// Per-column z-scoring with the population (1/M) standard deviation.
/// Constant columns map to zeros.
pub fn standardize(d: &Dataset) -> Result<Dataset> {
    let m = d.len();
    if m < 2 {
        return Err(Error::InvalidArgument(format!("standardize needs M >= 2, got {m}")));
    }
    let mut features = d.features.clone();
    for mut col in features.column_iter_mut() {
        let mean = col.mean();
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64;
        let sd = var.sqrt();
        if sd <= 1e-12 * (1.0 + mean.abs()) {
            col.fill(0.0);
        } else {
            col.apply(|v| *v = (*v - mean) / sd);
        }
    }
    Ok(Dataset {
        features,
        targets: d.targets.clone(),
        feature_names: d.feature_names.clone(),
        standardized: true,
    })
}

/// Disjoint seeded train/test subsample.
pub fn split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(d.len(), spec)?;
    Ok((d.subset(&train), d.subset(&test)))
}

pub fn split_indices(m: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if spec.train_count == 0 || spec.test_count == 0 {
        return Err(Error::InvalidArgument("split counts must be positive".into()));
    }
    if spec.train_count + spec.test_count > m {
        return Err(Error::InvalidArgument(format!(
            "split {}+{} exceeds {m} samples",
            spec.train_count, spec.test_count
        )));
    }
    let mut idx: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    idx.shuffle(&mut rng);
    let test = idx[spec.train_count..spec.train_count + spec.test_count].to_vec();
    idx.truncate(spec.train_count);
    Ok((idx, test))
}
