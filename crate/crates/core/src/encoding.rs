//! Feature-state encodings, their kernels and a finite orthonormal frame for
//! the span of the encoded training states.
//!
//! Every encoded state here is real in the frame we construct, so the whole
//! feature Hilbert space is simulated by `D <= M` real coordinates per state.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Relative eigenvalue cutoff used when none is given.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodingKind {
    /// Product of coherent states, one per feature: `exp(-|u-v|²/2)`.
    Coherent,
    /// Squeezing-state encoding with kernel `exp(-s²|u-v|²)`.
    SqueezedGaussian,
    /// Normalized amplitude encoding: cosine similarity.
    RawAmplitude,
}

impl std::str::FromStr for EncodingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherent" => Ok(EncodingKind::Coherent),
            "squeezed_gaussian" | "squeezed" => Ok(EncodingKind::SqueezedGaussian),
            "raw_amplitude" | "amplitude" => Ok(EncodingKind::RawAmplitude),
            other => Err(Error::InvalidArgument(format!("unknown encoding {other:?}"))),
        }
    }
}

impl std::fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EncodingKind::Coherent => "coherent",
            EncodingKind::SqueezedGaussian => "squeezed_gaussian",
            EncodingKind::RawAmplitude => "raw_amplitude",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodingSpec {
    pub kind: EncodingKind,
    pub scale: f64,
}

impl EncodingSpec {
    pub fn new(kind: EncodingKind, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidArgument(format!("encoding scale must be > 0, got {scale}")));
        }
        Ok(EncodingSpec { kind, scale })
    }

    pub fn coherent() -> Self {
        EncodingSpec { kind: EncodingKind::Coherent, scale: 1.0 }
    }

    pub fn squeezed(s: f64) -> Result<Self> {
        Self::new(EncodingKind::SqueezedGaussian, s)
    }

    pub fn raw_amplitude() -> Self {
        EncodingSpec { kind: EncodingKind::RawAmplitude, scale: 1.0 }
    }
}

/// Inner product of the encoded states of `u` and `v`.
pub fn kernel_value(u: &[f64], v: &[f64], spec: &EncodingSpec) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), got: v.len() });
    }
    let sq_dist = || u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    match spec.kind {
        EncodingKind::Coherent => Ok((-sq_dist() / 2.0).exp()),
        EncodingKind::SqueezedGaussian => Ok((-spec.scale * spec.scale * sq_dist()).exp()),
        EncodingKind::RawAmplitude => {
            let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if nu == 0.0 || nv == 0.0 {
                return Err(Error::ZeroVector);
            }
            if u == v {
                return Ok(1.0);
            }
            let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            Ok(dot / (nu * nv))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    pub entries: DMatrix<f64>,
    pub trace: f64,
}

impl KernelMatrix {
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), got: entries.ncols() });
        }
        let trace = entries.trace();
        Ok(KernelMatrix { entries, trace })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

fn rows(d: &Dataset) -> Vec<Vec<f64>> {
    (0..d.len()).map(|i| d.features.row(i).iter().copied().collect()).collect()
}

/// Gram matrix of the encoded samples of `d`.
pub fn gram(d: &Dataset, spec: &EncodingSpec) -> Result<KernelMatrix> {
    let m = d.len();
    if m == 0 {
        return Err(Error::InvalidArgument("gram of an empty dataset".into()));
    }
    let xs = rows(d);
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = kernel_value(&xs[i], &xs[j], spec)?;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    KernelMatrix::from_entries(k)
}

/// `kappa[m] = kernel(x_m, query)` over the training samples.
pub fn kernel_vector(d: &Dataset, query: &[f64], spec: &EncodingSpec) -> Result<DVector<f64>> {
    if query.len() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), got: query.len() });
    }
    let xs = rows(d);
    let vals = xs
        .iter()
        .map(|x| kernel_value(x, query, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(vals))
}

/// Coordinates of the encoded training states in an orthonormal basis of
/// their span: `coordinates * coordinatesᵀ = K`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureBasis {
    pub coordinates: DMatrix<f64>,
    pub rank_tolerance: f64,
}

impl FeatureBasis {
    pub fn num_samples(&self) -> usize {
        self.coordinates.nrows()
    }

    /// Dimension D of the span.
    pub fn rank(&self) -> usize {
        self.coordinates.ncols()
    }

    /// Normalized coordinates of encoded sample `m`.
    pub fn state(&self, m: usize) -> DVector<f64> {
        let row = self.coordinates.row(m).transpose();
        let n = row.norm();
        if n > 0.0 {
            row / n
        } else {
            row
        }
    }

    /// The same span expressed in another orthonormal frame (`q` is D×D
    /// orthogonal).
    pub fn rotated(&self, q: &DMatrix<f64>) -> FeatureBasis {
        FeatureBasis {
            coordinates: &self.coordinates * q,
            rank_tolerance: self.rank_tolerance,
        }
    }
}

/// Symmetric factorization of a PSD Gram matrix. Eigenvalues at or below
/// `rank_tolerance * λ_max` are dropped.
pub fn feature_basis(k: &KernelMatrix, rank_tolerance: f64) -> Result<FeatureBasis> {
    let m = k.dim();
    if m == 0 {
        return Err(Error::InvalidArgument("empty kernel matrix".into()));
    }
    let eig = SymmetricEigen::new(k.entries.clone());
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lmax = eig.eigenvalues[order[0]];
    let lmin = eig.eigenvalues[order[m - 1]];
    if lmin < -1e-8 * lmax.max(1.0) {
        return Err(Error::NotPsd { min_eigenvalue: lmin });
    }
    if !(lmax > 0.0) {
        return Err(Error::InvalidArgument("kernel matrix has no positive eigenvalue".into()));
    }
    let cutoff = rank_tolerance * lmax;
    let kept: Vec<usize> = order.into_iter().filter(|&i| eig.eigenvalues[i] > cutoff).collect();
    let mut coordinates = DMatrix::zeros(m, kept.len());
    for (d, &i) in kept.iter().enumerate() {
        let scale = eig.eigenvalues[i].sqrt();
        for r in 0..m {
            coordinates[(r, d)] = eig.eigenvectors[(r, i)] * scale;
        }
    }
    Ok(FeatureBasis { coordinates, rank_tolerance })
}

/// Projection of an encoded query onto the training span.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryEmbedding {
    /// Coefficients in the basis's frame.
    pub in_span: DVector<f64>,
    /// Norm of the out-of-span component of the (unit) query state.
    pub residual_norm: f64,
}

/// Embed from a precomputed kernel vector `kappa[m] = <φ_m|φ_query>`.
pub fn embed_kernel_vector(kappa: &DVector<f64>, basis: &FeatureBasis) -> Result<QueryEmbedding> {
    let c = &basis.coordinates;
    if kappa.len() != c.nrows() {
        return Err(Error::DimensionMismatch { expected: c.nrows(), got: kappa.len() });
    }
    // Least-squares coefficients (CᵀC)⁻¹Cᵀκ; CᵀC is diagonal in the native
    // frame and merely rotated otherwise.
    let gram = c.transpose() * c;
    let rhs = c.transpose() * kappa;
    let in_span = gram
        .cholesky()
        .ok_or(Error::SingularSystem)?
        .solve(&rhs);
    let residual_norm = (1.0 - in_span.norm_squared()).max(0.0).sqrt();
    Ok(QueryEmbedding { in_span, residual_norm })
}

pub fn embed_query(
    query: &[f64],
    d: &Dataset,
    spec: &EncodingSpec,
    basis: &FeatureBasis,
) -> Result<QueryEmbedding> {
    if d.len() != basis.num_samples() {
        return Err(Error::DimensionMismatch { expected: basis.num_samples(), got: d.len() });
    }
    let kappa = kernel_vector(d, query, spec)?;
    embed_kernel_vector(&kappa, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthesize;

    fn brute_kernel(u: &[f64], v: &[f64], s: f64) -> f64 {
        let mut acc = 1.0;
        for (a, b) in u.iter().zip(v) {
            acc *= (-(s * s) * (a - b) * (a - b)).exp();
        }
        acc
    }

    #[test]
    fn identical_inputs_give_one() {
        let u = [0.3, -1.2, 2.0];
        for spec in [EncodingSpec::coherent(), EncodingSpec::squeezed(0.7).unwrap(), EncodingSpec::raw_amplitude()] {
            assert!((kernel_value(&u, &u, &spec).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn coherent_kernel_value() {
        let k = kernel_value(&[0.0, 0.0], &[1.0, 1.0], &EncodingSpec::coherent()).unwrap();
        assert!((k - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn squeezed_kernel_matches_per_feature_product() {
        let spec = EncodingSpec::squeezed(2.0).unwrap();
        let k = kernel_value(&[0.5], &[1.5], &spec).unwrap();
        assert!((k - (-4.0f64).exp()).abs() < 1e-15);
        let u = [0.1, 0.4, -0.3];
        let v = [-0.2, 0.9, 0.0];
        let k = kernel_value(&u, &v, &spec).unwrap();
        assert!((k - brute_kernel(&u, &v, 2.0)).abs() < 1e-14);
    }

    #[test]
    fn kernel_errors() {
        let spec = EncodingSpec::coherent();
        assert!(matches!(kernel_value(&[1.0], &[1.0, 2.0], &spec), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            kernel_value(&[0.0, 0.0], &[1.0, 2.0], &EncodingSpec::raw_amplitude()),
            Err(Error::ZeroVector)
        ));
        assert!(EncodingSpec::squeezed(0.0).is_err());
    }

    #[test]
    fn gram_small_cases() {
        let one = synthesize(0, 1, 2, 0.0).unwrap();
        let k = gram(&one, &EncodingSpec::coherent()).unwrap();
        assert_eq!(k.entries, DMatrix::from_element(1, 1, 1.0));

        let mut two = synthesize(0, 2, 2, 0.0).unwrap();
        let r0 = two.features.row(0).clone_owned();
        two.features.set_row(1, &r0);
        let k = gram(&two, &EncodingSpec::squeezed(1.3).unwrap()).unwrap();
        assert!(k.entries.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let b = feature_basis(&k, DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(b.rank(), 1);
    }

    #[test]
    fn gram_matches_elementwise_oracle_and_is_psd() {
        let d = synthesize(5, 4, 3, 0.1).unwrap();
        let s = 0.8;
        let k = gram(&d, &EncodingSpec::squeezed(s).unwrap()).unwrap();
        for i in 0..4 {
            for j in i..4 {
                let xi: Vec<f64> = d.features.row(i).iter().copied().collect();
                let xj: Vec<f64> = d.features.row(j).iter().copied().collect();
                assert!((k.entries[(i, j)] - brute_kernel(&xi, &xj, s)).abs() < 1e-14);
            }
        }
        let min = SymmetricEigen::new(k.entries.clone()).eigenvalues.min();
        assert!(min >= -1e-10);
        assert!((k.trace - 4.0).abs() < 1e-14);
    }

    #[test]
    fn identity_gram_gives_full_rank_orthonormal_rows() {
        let k = KernelMatrix::from_entries(DMatrix::identity(3, 3)).unwrap();
        let b = feature_basis(&k, DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(b.rank(), 3);
        let g = &b.coordinates * b.coordinates.transpose();
        assert!((g - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-14);
    }

    #[test]
    fn all_ones_gram_is_rank_one() {
        let k = KernelMatrix::from_entries(DMatrix::from_element(4, 4, 1.0)).unwrap();
        assert_eq!(feature_basis(&k, DEFAULT_RANK_TOLERANCE).unwrap().rank(), 1);
    }

    #[test]
    fn not_psd_is_rejected() {
        let k = KernelMatrix::from_entries(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).unwrap();
        assert!(matches!(feature_basis(&k, DEFAULT_RANK_TOLERANCE), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn basis_reconstructs_gram() {
        let d = synthesize(9, 5, 2, 0.0).unwrap();
        let k = gram(&d, &EncodingSpec::coherent()).unwrap();
        let b = feature_basis(&k, DEFAULT_RANK_TOLERANCE).unwrap();
        let back = &b.coordinates * b.coordinates.transpose();
        assert!((back - &k.entries).abs().max() < 1e-9);
    }

    #[test]
    fn embedding_of_training_sample_is_its_row() {
        let d = synthesize(4, 5, 2, 0.0).unwrap();
        let spec = EncodingSpec::squeezed(0.6).unwrap();
        let b = feature_basis(&gram(&d, &spec).unwrap(), DEFAULT_RANK_TOLERANCE).unwrap();
        let x: Vec<f64> = d.features.row(2).iter().copied().collect();
        let e = embed_query(&x, &d, &spec, &b).unwrap();
        let row = b.coordinates.row(2).transpose();
        assert!((&e.in_span - row).abs().max() < 1e-8);
        assert!(e.residual_norm < 1e-4);
    }

    #[test]
    fn far_query_is_out_of_span() {
        let d = synthesize(4, 5, 2, 0.0).unwrap();
        let spec = EncodingSpec::squeezed(3.0).unwrap();
        let b = feature_basis(&gram(&d, &spec).unwrap(), DEFAULT_RANK_TOLERANCE).unwrap();
        let e = embed_query(&[40.0, -40.0], &d, &spec, &b).unwrap();
        assert!(e.in_span.norm() < 1e-12);
        assert!((e.residual_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embedding_reproduces_kernel_vector() {
        let d = synthesize(12, 6, 3, 0.0).unwrap();
        let spec = EncodingSpec::coherent();
        let b = feature_basis(&gram(&d, &spec).unwrap(), DEFAULT_RANK_TOLERANCE).unwrap();
        let q = [0.2, -0.5, 0.7];
        let e = embed_query(&q, &d, &spec, &b).unwrap();
        for m in 0..6 {
            let xm: Vec<f64> = d.features.row(m).iter().copied().collect();
            let direct = kernel_value(&xm, &q, &spec).unwrap();
            let via_span = b.coordinates.row(m).dot(&e.in_span.transpose());
            assert!((direct - via_span).abs() < 1e-9);
        }
    }
}
