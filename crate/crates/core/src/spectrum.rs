//! The superposed training state, its Schmidt (entanglement) spectrum,
//! spectrum transforms, overlap predictions and the classical kernel ridge
//! regression oracle they must agree with.
//!
//! The training state `M^{-1/2} Σ_m |m⟩|φ_m⟩` is held as its `M × D`
//! amplitude matrix; its singular value decomposition is the Schmidt
//! decomposition, and `AᵀA` is the reduced feature density matrix `K / Tr K`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::encoding::{FeatureBasis, KernelMatrix, QueryEmbedding};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct TrainingState {
    pub amplitudes: DMatrix<f64>,
    /// Schmidt coefficients, descending.
    pub singular_values: DVector<f64>,
    /// `M × r`, orthonormal columns.
    pub left_vectors: DMatrix<f64>,
    /// `D × r`, orthonormal columns.
    pub right_vectors: DMatrix<f64>,
}

impl TrainingState {
    /// Schmidt-decompose an arbitrary amplitude matrix (rows: address,
    /// columns: feature coordinates). Zero singular values are kept.
    pub fn from_amplitudes(amplitudes: DMatrix<f64>) -> Result<Self> {
        let (m, d) = amplitudes.shape();
        if m == 0 || d == 0 {
            return Err(Error::InvalidArgument("empty training state".into()));
        }
        let (u, sigma, v) = jacobi_svd(&amplitudes);
        let r = sigma.len();
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));

        let singular_values = DVector::from_iterator(r, order.iter().map(|&i| sigma[i]));
        let left_vectors = DMatrix::from_fn(m, r, |row, k| u[(row, order[k])]);
        let right_vectors = DMatrix::from_fn(d, r, |row, k| v[(row, order[k])]);
        Ok(TrainingState { amplitudes, singular_values, left_vectors, right_vectors })
    }

    pub fn num_samples(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.amplitudes.ncols()
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `Σ λᵢ²`, which equals `Tr K / M`.
    pub fn norm_squared(&self) -> f64 {
        self.singular_values.norm_squared()
    }

    /// Reduced density matrix of the feature register, `AᵀA`.
    pub fn reduced_density(&self) -> DMatrix<f64> {
        self.amplitudes.transpose() * &self.amplitudes
    }
}

/// Thin SVD `A = U diag(σ) Vᵀ` by one-sided Jacobi rotations, which keeps
/// small singular values to high relative accuracy. Columns of `U` for zero
/// singular values are completed to an orthonormal set.
fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    if a.nrows() < a.ncols() {
        let (u, s, v) = jacobi_svd(&a.transpose());
        return (v, s, u);
    }
    let (m, n) = a.shape();
    let mut g = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = g.column(p).norm_squared();
                let beta = g.column(q).norm_squared();
                let gamma = g.column(p).dot(&g.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut g, &mut v] {
                    for r in 0..mat.nrows() {
                        let (x, y) = (mat[(r, p)], mat[(r, q)]);
                        mat[(r, p)] = c * x - s * y;
                        mat[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..n).map(|j| g.column(j).norm()).collect();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let mut u = DMatrix::zeros(m, n);
    let mut missing = Vec::new();
    for j in 0..n {
        if sigma[j] > smax * 1e-300 && sigma[j] > 0.0 {
            u.set_column(j, &(g.column(j) / sigma[j]));
        } else {
            missing.push(j);
        }
    }
    // Gram-Schmidt completion from the standard basis.
    let mut e = 0;
    for j in missing {
        while e < m {
            let mut cand = DVector::zeros(m);
            cand[e] = 1.0;
            e += 1;
            for k in 0..n {
                let col = u.column(k).clone_owned();
                cand -= &col * col.dot(&cand);
            }
            let nrm = cand.norm();
            if nrm > 1e-8 {
                u.set_column(j, &(cand / nrm));
                break;
            }
        }
    }
    (u, sigma, v)
}

/// `|ψ_A⟩ = M^{-1/2} Σ_m |m⟩|φ_m⟩` on the span coordinates of `basis`.
pub fn build_training_state(basis: &FeatureBasis) -> Result<TrainingState> {
    let m = basis.num_samples();
    if m == 0 || basis.rank() == 0 {
        return Err(Error::InvalidArgument("empty feature basis".into()));
    }
    TrainingState::from_amplitudes(&basis.coordinates / (m as f64).sqrt())
}

/// Von Neumann entropy of either half, in nats.
pub fn entanglement_entropy(t: &TrainingState) -> f64 {
    entropy_of_spectrum(t.singular_values.as_slice())
}

/// Same entropy in bits.
pub fn entanglement_entropy_bits(t: &TrainingState) -> f64 {
    entanglement_entropy(t) / std::f64::consts::LN_2
}

pub fn entropy_of_spectrum(schmidt: &[f64]) -> f64 {
    schmidt
        .iter()
        .map(|l| l * l)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    Identity,
    /// `g(λ) = λ / (λ² + χ)`: exact ridge inversion.
    RidgeG,
    /// `f(λ, s, χ) = λ / sqrt(4/s⁴ + (λ² + χ)²)`: finite-squeezing inversion.
    FiniteSqueezeF,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumTransform {
    pub kind: TransformKind,
    pub chi: f64,
    pub s: f64,
    /// Map zero Schmidt coefficients to zero instead of failing when the
    /// ridge transform has `chi = 0`.
    pub pseudo_inverse: bool,
}

impl SpectrumTransform {
    pub fn identity() -> Self {
        SpectrumTransform { kind: TransformKind::Identity, chi: 0.0, s: 1.0, pseudo_inverse: false }
    }

    pub fn ridge(chi: f64) -> Self {
        SpectrumTransform { kind: TransformKind::RidgeG, chi, s: 1.0, pseudo_inverse: false }
    }

    pub fn finite_squeeze(s: f64, chi: f64) -> Self {
        SpectrumTransform { kind: TransformKind::FiniteSqueezeF, chi, s, pseudo_inverse: false }
    }

    pub fn with_pseudo_inverse(mut self) -> Self {
        self.pseudo_inverse = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.chi >= 0.0) || !self.chi.is_finite() {
            return Err(Error::InvalidArgument(format!("chi must be >= 0, got {}", self.chi)));
        }
        if !(self.s > 0.0) {
            return Err(Error::InvalidArgument(format!("s must be > 0, got {}", self.s)));
        }
        Ok(())
    }

    /// `h(λ)`; `None` marks a singular ridge inversion.
    pub fn eval(&self, lambda: f64) -> Option<f64> {
        match self.kind {
            TransformKind::Identity => Some(lambda),
            TransformKind::RidgeG => ridge_g(lambda, self.chi),
            TransformKind::FiniteSqueezeF => Some(finite_squeeze_f(lambda, self.s, self.chi)),
        }
        .or(if self.pseudo_inverse { Some(0.0) } else { None })
    }
}

pub fn ridge_g(lambda: f64, chi: f64) -> Option<f64> {
    let den = lambda * lambda + chi;
    if den == 0.0 {
        None
    } else {
        Some(lambda / den)
    }
}

pub fn finite_squeeze_f(lambda: f64, s: f64, chi: f64) -> f64 {
    let b = lambda * lambda + chi;
    lambda / (4.0 / s.powi(4) + b * b).sqrt()
}

/// A transformed Schmidt spectrum sharing the training state's vectors.
#[derive(Clone, Debug)]
pub struct TrainedState {
    /// Unnormalized transformed coefficients.
    pub components: DVector<f64>,
    pub left_vectors: DMatrix<f64>,
    pub right_vectors: DMatrix<f64>,
    pub normalization: f64,
}

impl TrainedState {
    pub fn from_components(t: &TrainingState, components: DVector<f64>) -> Result<Self> {
        if components.len() != t.rank() {
            return Err(Error::DimensionMismatch { expected: t.rank(), got: components.len() });
        }
        let normalization = components.norm();
        Ok(TrainedState {
            components,
            left_vectors: t.left_vectors.clone(),
            right_vectors: t.right_vectors.clone(),
            normalization,
        })
    }

    /// Dense `M × D` amplitude matrix `Σᵢ hᵢ uᵢ vᵢᵀ` (unnormalized).
    pub fn amplitudes(&self) -> DMatrix<f64> {
        &self.left_vectors * DMatrix::from_diagonal(&self.components) * self.right_vectors.transpose()
    }
}

pub fn apply_transform(t: &TrainingState, tr: &SpectrumTransform) -> Result<TrainedState> {
    tr.validate()?;
    let components = t
        .singular_values
        .iter()
        .enumerate()
        .map(|(index, &l)| tr.eval(l).ok_or(Error::SingularTransform { index }))
        .collect::<Result<Vec<_>>>()?;
    TrainedState::from_components(t, DVector::from_vec(components))
}

/// `|ψ_R⟩ = |ŷ⟩|φ_query⟩` with unit-norm targets.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryState {
    pub target_part: DVector<f64>,
    pub feature_part: DVector<f64>,
    pub residual_norm: f64,
}

impl QueryState {
    pub fn new(targets: &DVector<f64>, embedding: &QueryEmbedding) -> Result<Self> {
        let n = targets.norm();
        if !(n > 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(QueryState {
            target_part: targets / n,
            feature_part: embedding.in_span.clone(),
            residual_norm: embedding.residual_norm,
        })
    }
}

/// `⟨ψ_R|Σᵢ hᵢ|uᵢ⟩|vᵢ⟩` before dividing by the trained state's norm.
pub fn overlap_unnormalized(ts: &TrainedState, q: &QueryState) -> Result<f64> {
    let (m, r) = ts.left_vectors.shape();
    let d = ts.right_vectors.nrows();
    if q.target_part.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: q.target_part.len() });
    }
    if q.feature_part.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: q.feature_part.len() });
    }
    let yu = ts.left_vectors.transpose() * &q.target_part;
    let vphi = ts.right_vectors.transpose() * &q.feature_part;
    Ok((0..r).map(|i| ts.components[i] * yu[i] * vphi[i]).sum())
}

/// Overlap of the query state with the normalized trained state.
pub fn predict_overlap(ts: &TrainedState, q: &QueryState) -> Result<f64> {
    if !(ts.normalization > 0.0) {
        return Err(Error::ZeroState);
    }
    Ok(overlap_unnormalized(ts, q)? / ts.normalization)
}

/// Dual weights `α = (K + χI)⁻¹ y`.
pub fn krr_weights(k: &KernelMatrix, y: &DVector<f64>, chi_classical: f64) -> Result<DVector<f64>> {
    let m = k.dim();
    if y.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: y.len() });
    }
    if !(chi_classical >= 0.0) {
        return Err(Error::InvalidArgument(format!("chi must be >= 0, got {chi_classical}")));
    }
    let a = &k.entries + DMatrix::identity(m, m) * chi_classical;
    let chol = a.cholesky().ok_or(Error::SingularSystem)?;
    let alpha = chol.solve(y);
    if alpha.iter().all(|v| v.is_finite()) {
        Ok(alpha)
    } else {
        Err(Error::SingularSystem)
    }
}

/// Kernel ridge regression prediction `yᵀ(K + χI)⁻¹κ`.
pub fn classical_krr(
    k: &KernelMatrix,
    y: &DVector<f64>,
    chi_classical: f64,
    kappa: &DVector<f64>,
) -> Result<f64> {
    if kappa.len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: kappa.len() });
    }
    Ok(krr_weights(k, y, chi_classical)?.dot(kappa))
}

/// Constants tying the ridge-transformed overlap to classical KRR.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleScale {
    /// `√M / ‖y‖`.
    pub factor: f64,
    /// Classical regularizer matching quantum `chi`: `chi · Tr K`.
    pub chi_classical: f64,
}

/// With `A = Φ/√M` and `ρ = AᵀA`, push-through gives
/// `ŷᵀ A (ρ + χ)⁻¹ φ̃ = (√M/‖y‖) · yᵀ (K + χ Tr K · I)⁻¹ κ` whenever
/// `Tr K = M`. The left side is [`overlap_unnormalized`] under the ridge
/// transform; dividing it by the trained state's norm gives
/// [`predict_overlap`].
pub fn quantum_vs_classical_scale(t: &TrainingState, y: &DVector<f64>, chi: f64) -> OracleScale {
    let m = t.num_samples() as f64;
    let trace_k = m * t.norm_squared();
    OracleScale { factor: m.sqrt() / y.norm(), chi_classical: chi * trace_k }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwapEstimate {
    pub p_hat: f64,
    pub y_magnitude: f64,
}

/// Probability of reading `0` on the swap-test control qubit.
pub fn swap_probability(overlap: f64) -> f64 {
    0.5 * (1.0 + overlap * overlap)
}

/// Shot-sampled swap test. Only `|overlap|` is recoverable.
pub fn swap_test(overlap: f64, shots: u64, seed: u64) -> Result<SwapEstimate> {
    if shots == 0 {
        return Err(Error::InvalidArgument("swap test needs at least one shot".into()));
    }
    if !(overlap.abs() <= 1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!("overlap {overlap} outside [-1, 1]")));
    }
    let p = swap_probability(overlap).min(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = Binomial::new(shots, p).expect("p in [0,1]").sample(&mut rng);
    let p_hat = hits as f64 / shots as f64;
    Ok(SwapEstimate { p_hat, y_magnitude: (2.0 * p_hat - 1.0).max(0.0).sqrt() })
}
