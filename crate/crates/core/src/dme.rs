//! Density matrix exponentiation with a finite budget of sampled copies,
//! composed with the two-qumode post-selection.
//!
//! Each copy interaction is the conditional swap `exp(i δt q_x q_y S)`
//! between the feature register and a fresh copy `σ`. Expanding
//! `exp(iaS) = cos a + i sin a S` and tracing out the copy with
//!
//! ```text
//! Tr_c[X⊗σ] = X,  Tr_c[S(X⊗σ)] = σX,  Tr_c[(X⊗σ)S] = Xσ,  Tr_c[S(X⊗σ)S] = tr(X) σ
//! ```
//!
//! gives the exact one-step block map
//!
//! ```text
//! X ↦ cos a cos b X + i sin a cos b σX − i cos a sin b Xσ + sin a sin b tr(X) σ
//! ```
//!
//! where `a = θ δt` and `b = θ′ δt` are the ket/bra values of `θ = q_x q_y`.
//! Every qumode-dependent operation in the pipeline is a function of `θ`, so
//! the post-selected state is `Σ μ(θ)μ(θ′) e^{iχ(θ−θ′)} X_{θθ′}` over a
//! discretized law `μ` of `θ` under the ancilla densities.

use nalgebra::{Complex, DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cv::{invert_analytic_with_coupling, post_selection_amplitude, QumodeGrid, SqueezedAncilla};
use crate::encoding::FeatureBasis;
use crate::error::{Error, Result};
use crate::seed;
use crate::spectrum::{predict_overlap, QueryState, TrainingState};

pub type C64 = Complex<f64>;

pub const DEFAULT_BINS: usize = 65;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DMEPlan {
    /// Number of copies `N_t`, one per step.
    pub copies: usize,
    /// Samples superposed in each copy, `R_M`.
    pub subset_size: usize,
    /// Total coupling `T` of the target `exp(i T ρ q_x q_y)`.
    pub total_coupling: f64,
    pub seed: u64,
    pub trials: usize,
}

impl DMEPlan {
    pub fn new(copies: usize, subset_size: usize, total_coupling: f64, seed: u64) -> Result<Self> {
        if copies == 0 || subset_size == 0 {
            return Err(Error::InvalidArgument("copies and subset size must be positive".into()));
        }
        if !total_coupling.is_finite() {
            return Err(Error::InvalidArgument("total coupling must be finite".into()));
        }
        Ok(DMEPlan { copies, subset_size, total_coupling, seed, trials: 1 })
    }

    /// `δt = T / N_t`.
    pub fn step(&self) -> f64 {
        self.total_coupling / self.copies as f64
    }
}

/// Discrete law of `θ = q_x q_y`, symmetric about zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaMeasure {
    pub theta_nodes: Vec<f64>,
    pub theta_weights: Vec<f64>,
    /// Squeezing of the ancillas this law was built from.
    pub s: f64,
}

impl ThetaMeasure {
    pub fn len(&self) -> usize {
        self.theta_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_nodes.is_empty()
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.theta_nodes
            .iter()
            .zip(&self.theta_weights)
            .map(|(t, w)| w * t.powi(k))
            .sum()
    }

    /// `Σ μ_k e^{ibθ_k}`; real because the law is symmetric.
    pub fn characteristic(&self, b: f64) -> f64 {
        self.theta_nodes
            .iter()
            .zip(&self.theta_weights)
            .map(|(t, w)| w * (b * t).cos())
            .sum()
    }
}

// Bin coordinate u(θ) = sign(θ)(1 − exp(−2|θ|/3s²)) ∈ (−1, 1). Uniform bins
// in u are narrow where the density of θ peaks and widen along its
// exponential tails.
fn compand(theta: f64, s: f64) -> f64 {
    theta.signum() * (1.0 - (-2.0 * theta.abs() / (3.0 * s * s)).exp())
}

/// Histogram of `θ = q_x q_y` over grid pairs weighted by
/// `w_j w_k |ψ(q_j)|² |ψ(q_k)|²`, in `bins` symmetric bins. Each node is
/// its bin's weighted centroid; weights are normalized to 1.
pub fn theta_measure(s: f64, grid: &QumodeGrid, bins: usize) -> Result<ThetaMeasure> {
    let ancilla = SqueezedAncilla::new(s)?;
    if bins == 0 {
        return Err(Error::InvalidArgument("theta measure needs at least one bin".into()));
    }
    let norm = ancilla.grid_norm(grid);
    if (norm - 1.0).abs() > crate::cv::NORM_TOLERANCE {
        return Err(Error::GridTooCoarse(format!(
            "ancilla norm {norm} on Q={}, G={}",
            grid.half_width, grid.points
        )));
    }
    let dens: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&q, &w)| w * ancilla.density(q))
        .collect();
    let mut mass = vec![0.0; bins];
    let mut first = vec![0.0; bins];
    for (j, &qj) in grid.nodes.iter().enumerate() {
        for (k, &qk) in grid.nodes.iter().enumerate() {
            let theta = qj * qk;
            let w = dens[j] * dens[k];
            let u = compand(theta, s);
            let idx = (((u + 1.0) / 2.0 * bins as f64).floor() as isize).clamp(0, bins as isize - 1) as usize;
            mass[idx] += w;
            first[idx] += w * theta;
        }
    }
    let total: f64 = mass.iter().sum();
    let mut theta_nodes = vec![0.0; bins];
    let mut theta_weights = vec![0.0; bins];
    for i in 0..bins {
        let m = bins - 1 - i;
        // Symmetrize so the law is exactly even.
        let w = (mass[i] + mass[m]) / 2.0;
        let c = if w > 0.0 { (first[i] - first[m]) / (mass[i] + mass[m]) } else { 0.0 };
        theta_weights[i] = w / total;
        theta_nodes[i] = c;
    }
    Ok(ThetaMeasure { theta_nodes, theta_weights, s })
}

/// One exact copy-interaction step on a block, `a` ket angle, `b` bra angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockChannel {
    pub left_angle: f64,
    pub right_angle: f64,
}

impl BlockChannel {
    pub fn apply(&self, x: &DMatrix<C64>, sigma: &DMatrix<f64>) -> Result<DMatrix<C64>> {
        dme_step_exact(x, sigma, self.left_angle, self.right_angle)
    }
}

/// Partial trace over the copy of the conditional-swap conjugation.
pub fn dme_step_exact(x: &DMatrix<C64>, sigma: &DMatrix<f64>, a: f64, b: f64) -> Result<DMatrix<C64>> {
    let d = x.nrows();
    if !x.is_square() || sigma.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, got: sigma.nrows() });
    }
    let sig: DMatrix<C64> = sigma.map(|v| C64::new(v, 0.0));
    let i = C64::i();
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let tr = x.trace();
    Ok(x * C64::from(ca * cb) + (&sig * x) * (i * sa * cb) - (x * &sig) * (i * ca * sb)
        + &sig * (tr * sa * sb))
}

/// A uniformly random `R_M`-subset average of normalized encoded states.
pub fn sample_copy<R: Rng + ?Sized>(basis: &FeatureBasis, subset_size: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    let m = basis.num_samples();
    if subset_size == 0 || subset_size > m {
        return Err(Error::InvalidArgument(format!("subset size {subset_size} outside 1..={m}")));
    }
    let picks: Vec<usize> = if subset_size == m {
        (0..m).collect()
    } else {
        sample(rng, m, subset_size).into_vec()
    };
    Ok(copy_from_subset(basis, &picks))
}

fn copy_from_subset(basis: &FeatureBasis, picks: &[usize]) -> DMatrix<f64> {
    let d = basis.rank();
    let mut sigma = DMatrix::zeros(d, d);
    for &p in picks {
        let v = basis.state(p);
        sigma += &v * v.transpose();
    }
    sigma / picks.len() as f64
}

/// Everything the pipeline needs about one regression problem.
#[derive(Clone, Debug)]
pub struct DmeInstance {
    pub basis: FeatureBasis,
    pub state: TrainingState,
    pub queries: Vec<QueryState>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DmeOutcome {
    /// Swap-test magnitude `sqrt(⟨ψ_R|Ω|ψ_R⟩ / tr Ω)` per query.
    pub predictions: Vec<f64>,
    pub success_probability: f64,
}

// A representative (j, k) pair with the orbit's total weight.
struct PairTerm {
    j: usize,
    k: usize,
    weight: f64,
    cos_phase: f64,
    sin_phase: f64,
}

// Blocks for (k, j) are adjoints of (j, k), and with real inputs the mirrored
// pair (−θ_j, −θ_k) is the complex conjugate; all four contribute the same
// real part to a real quadratic form.
fn pair_terms(measure: &ThetaMeasure, chi: f64) -> Vec<PairTerm> {
    let b = measure.len();
    let mut out = Vec::new();
    for j in 0..b {
        for k in 0..b {
            let orbit = [(j, k), (k, j), (b - 1 - j, b - 1 - k), (b - 1 - k, b - 1 - j)];
            let rep = *orbit.iter().min().unwrap();
            if rep != (j, k) {
                continue;
            }
            let mut distinct = orbit.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            let w = measure.theta_weights[j] * measure.theta_weights[k];
            if w == 0.0 {
                continue;
            }
            let (sp, cp) = (chi * (measure.theta_nodes[j] - measure.theta_nodes[k])).sin_cos();
            out.push(PairTerm { j, k, weight: w * distinct.len() as f64, cos_phase: cp, sin_phase: sp });
        }
    }
    out
}

// Row-major small-matrix helpers for the inner loop.
fn matmul(a: &[f64], b: &[f64], out: &mut [f64], d: usize) {
    for r in 0..d {
        for c in 0..d {
            let mut acc = 0.0;
            for t in 0..d {
                acc += a[r * d + t] * b[t * d + c];
            }
            out[r * d + c] = acc;
        }
    }
}

fn trace(a: &[f64], d: usize) -> f64 {
    (0..d).map(|i| a[i * d + i]).sum()
}

struct Scratch {
    sxr: Vec<f64>,
    sxi: Vec<f64>,
    xrs: Vec<f64>,
    xis: Vec<f64>,
}

// X ← cc·X + i·sc·σX − i·cs·Xσ + ss·tr(X)·σ on split real/imag parts.
fn block_step(xr: &mut [f64], xi: &mut [f64], sigma: &[f64], coef: [f64; 4], d: usize, sc: &mut Scratch) {
    let [cc, sac, cas, ss] = coef;
    let (tr_r, tr_i) = (trace(xr, d), trace(xi, d));
    matmul(sigma, xr, &mut sc.sxr, d);
    matmul(sigma, xi, &mut sc.sxi, d);
    matmul(xr, sigma, &mut sc.xrs, d);
    matmul(xi, sigma, &mut sc.xis, d);
    for e in 0..d * d {
        let r = cc * xr[e] - sac * sc.sxi[e] + cas * sc.xis[e] + ss * tr_r * sigma[e];
        let i = cc * xi[e] + sac * sc.sxr[e] - cas * sc.xrs[e] + ss * tr_i * sigma[e];
        xr[e] = r;
        xi[e] = i;
    }
}

fn flatten(m: &DMatrix<f64>) -> Vec<f64> {
    let d = m.nrows();
    (0..d * d).map(|e| m[(e / d, e % d)]).collect()
}

/// Run the sampled-copy channel for an explicit copy sequence and return
/// the post-selected operator contracted for every query.
pub fn run_channel_with_copies(
    inst: &DmeInstance,
    copies: &[DMatrix<f64>],
    step: f64,
    chi: f64,
    measure: &ThetaMeasure,
) -> Result<DmeOutcome> {
    let d = inst.state.feature_dim();
    for c in copies {
        if c.shape() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, got: c.nrows() });
        }
    }
    let target = inst.queries.first().map(|q| q.target_part.clone());
    let w = match &target {
        Some(y) => inst.state.amplitudes.transpose() * y,
        None => DVector::zeros(d),
    };
    let xw0 = flatten(&(&w * w.transpose()));
    let xr0 = flatten(&inst.state.reduced_density());
    let flat_copies: Vec<Vec<f64>> = copies.iter().map(flatten).collect();

    let mut scratch = Scratch {
        sxr: vec![0.0; d * d],
        sxi: vec![0.0; d * d],
        xrs: vec![0.0; d * d],
        xis: vec![0.0; d * d],
    };
    let mut omega = vec![0.0; d * d];
    let mut prob = 0.0;
    let mut wr = vec![0.0; d * d];
    let mut wi = vec![0.0; d * d];
    let mut rr = vec![0.0; d * d];
    let mut ri = vec![0.0; d * d];
    for term in pair_terms(measure, chi) {
        let (sa, ca) = (measure.theta_nodes[term.j] * step).sin_cos();
        let (sb, cb) = (measure.theta_nodes[term.k] * step).sin_cos();
        let coef = [ca * cb, sa * cb, ca * sb, sa * sb];
        wr.copy_from_slice(&xw0);
        wi.fill(0.0);
        rr.copy_from_slice(&xr0);
        ri.fill(0.0);
        for sigma in &flat_copies {
            block_step(&mut wr, &mut wi, sigma, coef, d, &mut scratch);
            block_step(&mut rr, &mut ri, sigma, coef, d, &mut scratch);
        }
        let (cp, sp) = (term.cos_phase * term.weight, term.sin_phase * term.weight);
        for e in 0..d * d {
            omega[e] += cp * wr[e] - sp * wi[e];
        }
        prob += cp * trace(&rr, d) - sp * trace(&ri, d);
    }
    let omega = DMatrix::from_row_slice(d, d, &omega);
    let predictions = inst
        .queries
        .iter()
        .map(|q| {
            let num = q.feature_part.dot(&(&omega * &q.feature_part));
            if prob > 0.0 {
                (num.max(0.0) / prob).sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Ok(DmeOutcome { predictions, success_probability: prob })
}

/// Draw the whole copy sequence for one run up front.
pub fn draw_copies(basis: &FeatureBasis, plan: &DMEPlan) -> Result<Vec<DMatrix<f64>>> {
    let m = basis.num_samples();
    if plan.subset_size > m {
        return Err(Error::InvalidArgument(format!("subset size {} exceeds M={m}", plan.subset_size)));
    }
    if plan.subset_size == m {
        let full = copy_from_subset(basis, &(0..m).collect::<Vec<_>>());
        return Ok(vec![full; plan.copies]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    (0..plan.copies).map(|_| sample_copy(basis, plan.subset_size, &mut rng)).collect()
}

/// Full sampled-copy pipeline: `N_t` copy steps, the regularization phase
/// and post-selection through `measure`.
pub fn run_pipeline_dme(inst: &DmeInstance, plan: &DMEPlan, chi: f64, measure: &ThetaMeasure) -> Result<DmeOutcome> {
    let copies = draw_copies(&inst.basis, plan)?;
    run_channel_with_copies(inst, &copies, plan.step(), chi, measure)
}

/// The same contraction with the ideal phase `exp(i(Tρ + χ)θ)` in place of
/// the copy steps: component `i` picks up `Σ μ_k e^{i(Tλᵢ² + χ)θ_k}`.
pub fn exact_phase_components(t: &TrainingState, coupling: f64, chi: f64, measure: &ThetaMeasure) -> DVector<f64> {
    DVector::from_iterator(
        t.rank(),
        t.singular_values.iter().map(|l| l * measure.characteristic(coupling * l * l + chi)),
    )
}

/// `|⟨ψ_R|ψ'_{A⁺}⟩|` for the closed-form finite-squeezing channel.
pub fn reference_predictions(inst: &DmeInstance, s: f64, chi: f64, coupling: f64) -> Result<Vec<f64>> {
    let r = invert_analytic_with_coupling(&inst.state, s, chi, coupling)?;
    inst.queries
        .iter()
        .map(|q| predict_overlap(&r.normalized_state, q).map(f64::abs))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub n_t: usize,
    pub r_m: usize,
    pub mean_abs_err: f64,
    pub std_err: f64,
    pub trials: usize,
    pub seed: u64,
}

pub const SCAN_HEADER: &str = "n_t,r_m,mean_abs_err,std_err,trials,seed";

#[derive(Clone, Debug)]
pub struct ScanSpec {
    pub copies: Vec<usize>,
    pub subset_sizes: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub s: f64,
    pub chi: f64,
    pub total_coupling: f64,
}

/// Mean absolute prediction error against the closed-form channel over
/// `trials` independent copy sequences per `(N_t, R_M)`. Trial `i` of
/// `(N_t, R_M)` uses seed `derive(master, N_t·2³² + R_M, i)`.
pub fn error_vs_copies_scan(inst: &DmeInstance, spec: &ScanSpec, measure: &ThetaMeasure) -> Result<Vec<ScanRow>> {
    if spec.trials == 0 {
        return Err(Error::InvalidArgument("scan needs at least one trial".into()));
    }
    let reference = reference_predictions(inst, spec.s, spec.chi, spec.total_coupling)?;
    let m = inst.basis.num_samples();
    let mut rows = Vec::new();
    for &n_t in &spec.copies {
        for &r_m in &spec.subset_sizes {
            let stream = ((n_t as u64) << 32) | r_m as u64;
            let mut errs = Vec::with_capacity(spec.trials);
            // Full-subset copies are all ρ_K: every trial is identical.
            let distinct = if r_m == m { 1 } else { spec.trials };
            for trial in 0..distinct {
                let plan = DMEPlan {
                    trials: spec.trials,
                    ..DMEPlan::new(n_t, r_m, spec.total_coupling, seed::derive(spec.master_seed, stream, trial as u64))?
                };
                let out = run_pipeline_dme(inst, &plan, spec.chi, measure)?;
                let e = out
                    .predictions
                    .iter()
                    .zip(&reference)
                    .map(|(p, r)| (p - r).abs())
                    .sum::<f64>()
                    / reference.len().max(1) as f64;
                errs.push(e);
            }
            let (mean, se) = if distinct == 1 { (errs[0], 0.0) } else { mean_and_std_err(&errs) };
            rows.push(ScanRow { n_t, r_m, mean_abs_err: mean, std_err: se, trials: spec.trials, seed: spec.master_seed });
        }
    }
    Ok(rows)
}

pub fn mean_and_std_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Closed-form check of a measure against the analytic post-selection
/// amplitude at phase slope `b`.
pub fn characteristic_error(measure: &ThetaMeasure, b: f64) -> f64 {
    (measure.characteristic(b) - post_selection_amplitude(b, measure.s)).abs()
}
