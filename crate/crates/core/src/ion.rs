//! Fock-truncated simulation of a single trapped ion: one internal qubit and
//! two motional modes, with `q̂ = (a + a†)/√2` and `p̂ = i(a† − a)/√2`.
//!
//! Gate conventions: `R(θ, n̂) = e^{iθ n̂·σ}`, `P(θ) = e^{iθ a†a}`,
//! `D(h) = e^{h a − h* a†}`, `S(s) = e^{−(ln s / 2)(a² − a†²)}`,
//! `B(θ) = e^{iθ(a_x† a_y + a_y† a_x)}`, `C_q(χ) = e^{iχ q̂_x q̂_y}`,
//! Dirac gates `e^{i t g q̂_x σ_x}` and `e^{i t g q̂_y σ_y}`, and
//! `W(η) = e^{iη σ_z q̂_x q̂_y}`. Each is the exact exponential of its
//! generator truncated to `n_max` phonons per mode.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

pub const LEAKAGE_THRESHOLD: f64 = 1e-6;
pub const NORM_TOLERANCE: f64 = 1e-10;
pub const MAX_REPETITIONS: usize = 1_000_000;
/// Fock levels `0..=LOW_EXCITATION` per mode span the subspace on which
/// operator distances are measured.
pub const LOW_EXCITATION: usize = 4;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

fn cis(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

// Single-mode operators ---------------------------------------------------

pub fn annihilation(n_max: usize) -> DMatrix<C64> {
    let n = n_max + 1;
    DMatrix::from_fn(n, n, |r, c| if c == r + 1 { C64::from((c as f64).sqrt()) } else { ZERO })
}

pub fn position(n_max: usize) -> DMatrix<C64> {
    let a = annihilation(n_max);
    (&a + a.adjoint()) / C64::from(2f64.sqrt())
}

pub fn momentum(n_max: usize) -> DMatrix<C64> {
    let a = annihilation(n_max);
    (a.adjoint() - &a) * (I / 2f64.sqrt())
}

pub fn number(n_max: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n_max + 1, n_max + 1, |r, c| if r == c { C64::from(r as f64) } else { ZERO })
}

/// `exp(A)` for anti-Hermitian `A`, through the spectrum of `iA`.
fn expm_antihermitian(a: &DMatrix<C64>) -> DMatrix<C64> {
    let h = a * I;
    let eig = SymmetricEigen::new(h);
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| cis(-l)));
    v * phases * v.adjoint()
}

/// Eigenbasis of truncated `q̂`: real nodes (ascending) and orthonormal
/// eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct QuadratureBasis {
    pub nodes: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl QuadratureBasis {
    pub fn new(n_max: usize) -> Self {
        let n = n_max + 1;
        let q = DMatrix::from_fn(n, n, |r, c| {
            if c == r + 1 {
                (c as f64 / 2.0).sqrt()
            } else if r == c + 1 {
                (r as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(q);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let nodes = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        QuadratureBasis { nodes, vectors }
    }
}

/// Truncated coherent state `|α⟩` (eigenstate of `a`), renormalized.
pub fn coherent_state(alpha: C64, n_max: usize) -> DVector<C64> {
    let mut v = DVector::from_element(n_max + 1, ZERO);
    let mut c = C64::from((-alpha.norm_sqr() / 2.0).exp());
    for k in 0..=n_max {
        v[k] = c;
        c = c * alpha / ((k + 1) as f64).sqrt();
    }
    let norm = v.norm();
    v / C64::from(norm)
}

pub fn fock_state(k: usize, n_max: usize) -> Result<DVector<C64>> {
    if k > n_max {
        return Err(Error::InvalidArgument(format!("Fock level {k} above cutoff {n_max}")));
    }
    let mut v = DVector::from_element(n_max + 1, ZERO);
    v[k] = ONE;
    Ok(v)
}

// State -------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    X,
    Y,
}

/// Amplitudes over qubit × mode_x × mode_y, flattened as `(q·n + x)·n + y`.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridState {
    pub amplitudes: DVector<C64>,
    pub cutoff: usize,
}

impl HybridState {
    pub fn dim_mode(&self) -> usize {
        self.cutoff + 1
    }

    pub fn from_amplitudes(amplitudes: DVector<C64>, cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidArgument("cutoff must be at least 2".into()));
        }
        let n = cutoff + 1;
        if amplitudes.len() != 2 * n * n {
            return Err(Error::DimensionMismatch { expected: 2 * n * n, got: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("state norm {norm} is not 1")));
        }
        Ok(HybridState { amplitudes, cutoff })
    }

    pub fn product(qubit: [C64; 2], mode_x: &DVector<C64>, mode_y: &DVector<C64>) -> Result<Self> {
        if mode_x.len() != mode_y.len() {
            return Err(Error::DimensionMismatch { expected: mode_x.len(), got: mode_y.len() });
        }
        let n = mode_x.len();
        let mut amps = DVector::from_element(2 * n * n, ZERO);
        for q in 0..2 {
            for x in 0..n {
                for y in 0..n {
                    amps[(q * n + x) * n + y] = qubit[q] * mode_x[x] * mode_y[y];
                }
            }
        }
        HybridState::from_amplitudes(amps, n.saturating_sub(1))
    }

    pub fn vacuum(cutoff: usize) -> Result<Self> {
        let v = fock_state(0, cutoff)?;
        HybridState::product([ONE, ZERO], &v, &v)
    }

    fn idx(&self, q: usize, x: usize, y: usize) -> usize {
        let n = self.dim_mode();
        (q * n + x) * n + y
    }

    /// Population in the top two Fock levels of either mode.
    pub fn leakage(&self) -> f64 {
        let n = self.dim_mode();
        let mut p = 0.0;
        for q in 0..2 {
            for x in 0..n {
                for y in 0..n {
                    if x + 2 >= n || y + 2 >= n {
                        p += self.amplitudes[self.idx(q, x, y)].norm_sqr();
                    }
                }
            }
        }
        p
    }

    pub fn qubit_probability(&self, q: usize) -> f64 {
        let n = self.dim_mode();
        (0..n * n).map(|e| self.amplitudes[q * n * n + e].norm_sqr()).sum()
    }

    /// `⟨ψ| A_x ⊗ B_y |ψ⟩` summed over the qubit.
    pub fn expect_modes(&self, on_x: &DMatrix<C64>, on_y: &DMatrix<C64>) -> C64 {
        let n = self.dim_mode();
        let mut acc = ZERO;
        for q in 0..2 {
            let m = DMatrix::from_fn(n, n, |x, y| self.amplitudes[self.idx(q, x, y)]);
            let applied = on_x * &m * on_y.transpose();
            acc += m.zip_fold(&applied, ZERO, |s, a, b| s + a.conj() * b);
        }
        acc
    }

    pub fn inner(&self, other: &HybridState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

// Gates -------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateSpec {
    QubitRotation { theta: f64, axis: [f64; 3] },
    /// The plain Hadamard; `R(π/2, (x̂+ẑ)/√2)` equals `i` times it.
    Hadamard,
    ModePhase { mode: Mode, theta: f64 },
    Displacement { mode: Mode, h: C64 },
    Squeeze { mode: Mode, s: f64 },
    BeamSplitter { theta: f64 },
    CrossPhase { chi: f64 },
    DiracX { g: f64, t: f64 },
    DiracY { g: f64, t: f64 },
    W { eta: f64 },
    /// Swap the two modes when the qubit is `|1⟩`.
    ControlledSwap,
}

impl GateSpec {
    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let ok = match *self {
            GateSpec::QubitRotation { theta, axis } => {
                finite(&[theta]) && finite(&axis) && axis.iter().map(|a| a * a).sum::<f64>() > 0.0
            }
            GateSpec::ModePhase { theta, .. } | GateSpec::BeamSplitter { theta } => finite(&[theta]),
            GateSpec::Displacement { h, .. } => finite(&[h.re, h.im]),
            GateSpec::Squeeze { s, .. } => s.is_finite() && s > 0.0,
            GateSpec::CrossPhase { chi } => finite(&[chi]),
            GateSpec::DiracX { g, t } | GateSpec::DiracY { g, t } => finite(&[g, t]),
            GateSpec::W { eta } => finite(&[eta]),
            GateSpec::Hadamard | GateSpec::ControlledSwap => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid gate parameters {self:?}")))
        }
    }

    fn is_quadrature_diagonal(&self) -> bool {
        matches!(
            self,
            GateSpec::CrossPhase { .. } | GateSpec::DiracX { .. } | GateSpec::DiracY { .. } | GateSpec::W { .. }
        )
    }

    /// The 2×2 qubit block at quadrature nodes `(q_x, q_y)`.
    fn quadrature_block(&self, qx: f64, qy: f64) -> [[C64; 2]; 2] {
        match *self {
            GateSpec::CrossPhase { chi } => {
                let p = cis(chi * qx * qy);
                [[p, ZERO], [ZERO, p]]
            }
            GateSpec::DiracX { g, t } => {
                let (s, c) = (t * g * qx).sin_cos();
                [[C64::from(c), I * s], [I * s, C64::from(c)]]
            }
            GateSpec::DiracY { g, t } => {
                let (s, c) = (t * g * qy).sin_cos();
                [[C64::from(c), C64::from(s)], [C64::from(-s), C64::from(c)]]
            }
            GateSpec::W { eta } => [[cis(eta * qx * qy), ZERO], [ZERO, cis(-eta * qx * qy)]],
            _ => [[ONE, ZERO], [ZERO, ONE]],
        }
    }
}

fn mul2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn qubit_matrix(gate: &GateSpec) -> Option<[[C64; 2]; 2]> {
    match *gate {
        GateSpec::QubitRotation { theta, axis } => {
            let len = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
            let [nx, ny, nz] = axis.map(|a| a / len);
            let (s, c) = theta.sin_cos();
            // cos θ I + i sin θ (n̂·σ)
            Some([
                [C64::new(c, s * nz), I * s * C64::new(nx, -ny)],
                [I * s * C64::new(nx, ny), C64::new(c, -s * nz)],
            ])
        }
        GateSpec::Hadamard => {
            let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
            Some([[h, h], [h, -h]])
        }
        _ => None,
    }
}

/// Truncated single-mode unitary for mode gates.
pub fn mode_matrix(gate: &GateSpec, n_max: usize) -> Option<DMatrix<C64>> {
    let a = annihilation(n_max);
    match *gate {
        GateSpec::ModePhase { theta, .. } => {
            Some(DMatrix::from_fn(n_max + 1, n_max + 1, |r, c| if r == c { cis(theta * r as f64) } else { ZERO }))
        }
        GateSpec::Displacement { h, .. } => Some(expm_antihermitian(&(&a * h - a.adjoint() * h.conj()))),
        GateSpec::Squeeze { s, .. } => {
            let a2 = &a * &a;
            let gen = (&a2 - a2.adjoint()) * C64::from(-s.ln() / 2.0);
            Some(expm_antihermitian(&gen))
        }
        _ => None,
    }
}

// Beam splitter blocks by total excitation: (total, x-values, unitary).
fn beam_splitter_blocks(theta: f64, n_max: usize) -> Vec<(usize, Vec<usize>, DMatrix<C64>)> {
    let mut out = Vec::new();
    for total in 0..=2 * n_max {
        let xs: Vec<usize> = (total.saturating_sub(n_max)..=total.min(n_max)).collect();
        let k = xs.len();
        let g = DMatrix::from_fn(k, k, |r, c| {
            let (x, xc) = (xs[r], xs[c]);
            // ⟨x+1, y−1| a_x† a_y |x, y⟩ and its adjoint.
            if x == xc + 1 {
                ((xc + 1) as f64 * (total - xc) as f64).sqrt()
            } else if xc == x + 1 {
                ((x + 1) as f64 * (total - x) as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(g);
        let v = eig.eigenvectors.map(C64::from);
        let ph = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| cis(theta * l)));
        out.push((total, xs, &v * ph * v.adjoint()));
    }
    out
}

/// Result of a gate application with its leakage flag.
#[derive(Clone, Debug)]
pub struct GateResult {
    pub state: HybridState,
    pub leakage: f64,
    pub reliable: bool,
}

pub fn apply_gate(state: &HybridState, gate: &GateSpec) -> Result<GateResult> {
    apply_gate_with_threshold(state, gate, LEAKAGE_THRESHOLD)
}

pub fn apply_gate_with_threshold(state: &HybridState, gate: &GateSpec, threshold: f64) -> Result<GateResult> {
    apply_sequence_with_threshold(state, std::slice::from_ref(gate), threshold)
}

pub fn apply_sequence(state: &HybridState, gates: &[GateSpec]) -> Result<GateResult> {
    apply_sequence_with_threshold(state, gates, LEAKAGE_THRESHOLD)
}

/// Apply gates in order. Runs of quadrature-diagonal gates are fused into
/// one pass in the joint `q̂_x, q̂_y` eigenbasis.
pub fn apply_sequence_with_threshold(state: &HybridState, gates: &[GateSpec], threshold: f64) -> Result<GateResult> {
    for g in gates {
        g.validate()?;
    }
    let n_max = state.cutoff;
    let mut amps = state.amplitudes.clone();
    let mut basis: Option<QuadratureBasis> = None;
    let mut i = 0;
    while i < gates.len() {
        if gates[i].is_quadrature_diagonal() {
            let start = i;
            while i < gates.len() && gates[i].is_quadrature_diagonal() {
                i += 1;
            }
            let qb = basis.get_or_insert_with(|| QuadratureBasis::new(n_max));
            let blocks = fused_blocks(&gates[start..i], qb);
            amps = apply_quadrature_blocks(&amps, &blocks, qb);
            continue;
        }
        amps = apply_single(&amps, &gates[i], n_max);
        i += 1;
    }
    let out = HybridState { amplitudes: amps, cutoff: n_max };
    let leakage = out.leakage();
    Ok(GateResult { reliable: leakage < threshold, leakage, state: out })
}

// Fused product (later gates on the left) per node pair, indexed j·n + k.
fn fused_blocks(gates: &[GateSpec], qb: &QuadratureBasis) -> Vec<[[C64; 2]; 2]> {
    let n = qb.nodes.len();
    let mut out = Vec::with_capacity(n * n);
    for &qx in &qb.nodes {
        for &qy in &qb.nodes {
            let mut m = [[ONE, ZERO], [ZERO, ONE]];
            for g in gates {
                m = mul2(&g.quadrature_block(qx, qy), &m);
            }
            out.push(m);
        }
    }
    out
}

fn apply_quadrature_blocks(amps: &DVector<C64>, blocks: &[[[C64; 2]; 2]], qb: &QuadratureBasis) -> DVector<C64> {
    let n = qb.nodes.len();
    let v = qb.vectors.map(C64::from);
    // Per qubit slice M (x, y): coordinates Vᵀ M V.
    let mut coords: Vec<DMatrix<C64>> = (0..2)
        .map(|q| {
            let m = DMatrix::from_fn(n, n, |x, y| amps[(q * n + x) * n + y]);
            v.transpose() * m * &v
        })
        .collect();
    for j in 0..n {
        for k in 0..n {
            let b = &blocks[j * n + k];
            let (c0, c1) = (coords[0][(j, k)], coords[1][(j, k)]);
            coords[0][(j, k)] = b[0][0] * c0 + b[0][1] * c1;
            coords[1][(j, k)] = b[1][0] * c0 + b[1][1] * c1;
        }
    }
    let mut out = DVector::from_element(2 * n * n, ZERO);
    for (q, c) in coords.iter().enumerate() {
        let m = &v * c * v.transpose();
        for x in 0..n {
            for y in 0..n {
                out[(q * n + x) * n + y] = m[(x, y)];
            }
        }
    }
    out
}

fn apply_single(amps: &DVector<C64>, gate: &GateSpec, n_max: usize) -> DVector<C64> {
    let n = n_max + 1;
    let at = |q: usize, x: usize, y: usize| (q * n + x) * n + y;
    let mut out = amps.clone();
    if let Some(u) = qubit_matrix(gate) {
        for e in 0..n * n {
            let (a0, a1) = (amps[e], amps[n * n + e]);
            out[e] = u[0][0] * a0 + u[0][1] * a1;
            out[n * n + e] = u[1][0] * a0 + u[1][1] * a1;
        }
        return out;
    }
    match *gate {
        GateSpec::ModePhase { mode, .. } | GateSpec::Displacement { mode, .. } | GateSpec::Squeeze { mode, .. } => {
            let u = mode_matrix(gate, n_max).expect("mode gate");
            for q in 0..2 {
                let m = DMatrix::from_fn(n, n, |x, y| amps[at(q, x, y)]);
                let r = match mode {
                    Mode::X => &u * m,
                    Mode::Y => m * u.transpose(),
                };
                for x in 0..n {
                    for y in 0..n {
                        out[at(q, x, y)] = r[(x, y)];
                    }
                }
            }
        }
        GateSpec::BeamSplitter { theta } => {
            for (total, xs, u) in beam_splitter_blocks(theta, n_max) {
                for q in 0..2 {
                    for (r, &x) in xs.iter().enumerate() {
                        let mut acc = ZERO;
                        for (c, &xc) in xs.iter().enumerate() {
                            acc += u[(r, c)] * amps[at(q, xc, total - xc)];
                        }
                        out[at(q, x, total - x)] = acc;
                    }
                }
            }
        }
        GateSpec::ControlledSwap => {
            for x in 0..n {
                for y in 0..n {
                    out[at(1, x, y)] = amps[at(1, y, x)];
                }
            }
        }
        _ => unreachable!("quadrature gates are fused"),
    }
    out
}

// W by commutator cycles ----------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct WSequence {
    /// Gates in application order.
    pub gates: Vec<GateSpec>,
    pub repetitions: usize,
    /// Step after rescaling so that `2 g² δt² · repetitions = |η|` exactly.
    pub effective_dt: f64,
}

pub fn build_w_by_commutator(eta: f64, g: f64, dt: f64) -> Result<WSequence> {
    build_w_by_commutator_capped(eta, g, dt, MAX_REPETITIONS)
}

/// One cycle `e^{iH₂δt} e^{iH₁δt} e^{−iH₂δt} e^{−iH₁δt}` equals
/// `W(2g²δt²)` to second order, because `[H₁, H₂] = 2i g² σ_z q̂_x q̂_y`.
/// Negative `η` uses the mirrored cycle with `H₁` and `H₂` exchanged.
pub fn build_w_by_commutator_capped(eta: f64, g: f64, dt: f64, cap: usize) -> Result<WSequence> {
    if !(eta.is_finite() && g.is_finite() && dt.is_finite()) {
        return Err(Error::InvalidArgument("W construction parameters must be finite".into()));
    }
    if eta == 0.0 {
        return Ok(WSequence { gates: Vec::new(), repetitions: 0, effective_dt: dt });
    }
    if dt == 0.0 || g == 0.0 {
        return Err(Error::InvalidArgument("W construction needs nonzero dt and g".into()));
    }
    let ideal = eta.abs() / (2.0 * g * g * dt * dt);
    if ideal > cap as f64 {
        return Err(Error::InvalidArgument(format!("W construction needs {ideal:.0} cycles, cap is {cap}")));
    }
    let repetitions = (ideal.round() as usize).max(1);
    let step = (eta.abs() / (2.0 * g * g * repetitions as f64)).sqrt();
    let cycle = if eta > 0 as f64 {
        [
            GateSpec::DiracX { g, t: -step },
            GateSpec::DiracY { g, t: -step },
            GateSpec::DiracX { g, t: step },
            GateSpec::DiracY { g, t: step },
        ]
    } else {
        [
            GateSpec::DiracY { g, t: -step },
            GateSpec::DiracX { g, t: -step },
            GateSpec::DiracY { g, t: step },
            GateSpec::DiracX { g, t: step },
        ]
    };
    let gates = cycle.iter().copied().cycle().take(4 * repetitions).collect();
    Ok(WSequence { gates, repetitions, effective_dt: step })
}

fn spectral_norm(m: DMatrix<C64>) -> f64 {
    m.singular_values().max()
}

fn block_distance(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> f64 {
    let d = DMatrix::from_fn(2, 2, |r, c| a[r][c] - b[r][c]);
    spectral_norm(d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WConstructionReport {
    pub repetitions: usize,
    pub effective_dt: f64,
    /// `‖(U_seq − W(η)) P‖` with `P` the projector on Fock levels
    /// `0..=low` of both modes.
    pub distance: f64,
    /// Worst leakage over low-subspace inputs, for both the sequence and the
    /// exact gate.
    pub leakage: f64,
    pub reliable: bool,
}

/// Distance between the commutator sequence and the exact `W(η)` at cutoff
/// `n_max`, restricted to the low-excitation subspace.
pub fn w_construction_error(eta: f64, g: f64, dt: f64, n_max: usize, low: usize) -> Result<WConstructionReport> {
    if low + 2 > n_max {
        return Err(Error::InvalidArgument(format!("low subspace {low} too close to cutoff {n_max}")));
    }
    let seq = build_w_by_commutator(eta, g, dt)?;
    let qb = QuadratureBasis::new(n_max);
    let n = n_max + 1;
    let seq_blocks = fused_blocks(&seq.gates, &qb);
    let exact_blocks = fused_blocks(&[GateSpec::W { eta }], &qb);

    // Gram matrix of (U − V)P over low inputs |q, x, y⟩.
    let l = low + 1;
    let dim = 2 * l * l;
    let mut gram = DMatrix::from_element(dim, dim, ZERO);
    let v = &qb.vectors;
    for j in 0..n {
        for k in 0..n {
            let a = &seq_blocks[j * n + k];
            let b = &exact_blocks[j * n + k];
            let d = [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]];
            // DᴴD
            let mut dd = [[ZERO; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    dd[r][c] = d[0][r].conj() * d[0][c] + d[1][r].conj() * d[1][c];
                }
            }
            if dd.iter().flatten().all(|z| z.norm() == 0.0) {
                continue;
            }
            let amp: Vec<f64> = (0..l * l).map(|e| v[(e / l, j)] * v[(e % l, k)]).collect();
            for q in 0..2 {
                for e in 0..l * l {
                    for qp in 0..2 {
                        let w = dd[q][qp];
                        for ep in 0..l * l {
                            gram[(q * l * l + e, qp * l * l + ep)] += w * (amp[e] * amp[ep]);
                        }
                    }
                }
            }
        }
    }
    let distance = SymmetricEigen::new(gram).eigenvalues.max().max(0.0).sqrt();

    let mut leakage: f64 = 0.0;
    for q in 0..2 {
        for x in 0..l {
            for y in 0..l {
                let mut amps = DVector::from_element(2 * n * n, ZERO);
                amps[(q * n + x) * n + y] = ONE;
                for blocks in [&seq_blocks, &exact_blocks] {
                    let out = HybridState { amplitudes: apply_quadrature_blocks(&amps, blocks, &qb), cutoff: n_max };
                    leakage = leakage.max(out.leakage());
                }
            }
        }
    }
    Ok(WConstructionReport {
        repetitions: seq.repetitions,
        effective_dt: seq.effective_dt,
        distance,
        leakage,
        reliable: leakage < LEAKAGE_THRESHOLD,
    })
}

// Conditional swap ----------------------------------------------------------

/// One element of the composite `C_S · H · W(δt) · H · C_S`.
#[derive(Clone, Debug, PartialEq)]
pub enum CompositeStep {
    /// Swap registers `b` and `c` when the control qubit is `|1⟩`.
    RegisterSwap,
    Hadamard,
    ExactW { eta: f64 },
    CommutatorW(WSequence),
}

/// The five-element composite for `e^{iδt q̂_x q̂_y S}` where `S` swaps two
/// single-mode registers. `commutator` selects the Dirac-cycle `W` with
/// coupling `g` and step `w_dt` instead of the ideal gate.
pub fn conditional_swap_compose(dt: f64, commutator: Option<(f64, f64)>) -> Result<Vec<CompositeStep>> {
    if !dt.is_finite() {
        return Err(Error::InvalidArgument("dt must be finite".into()));
    }
    let w = match commutator {
        None => CompositeStep::ExactW { eta: dt },
        Some((g, w_dt)) => CompositeStep::CommutatorW(build_w_by_commutator(dt, g, w_dt)?),
    };
    Ok(vec![CompositeStep::RegisterSwap, CompositeStep::Hadamard, w, CompositeStep::Hadamard, CompositeStep::RegisterSwap])
}

/// System for the composite: control qubit, the ion's two modes, and
/// registers `b`, `c`, all modes at the same cutoff.
#[derive(Clone, Debug)]
pub struct SwapSystem {
    pub cutoff: usize,
    basis: QuadratureBasis,
}

impl SwapSystem {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidArgument("cutoff too small for a register swap".into()));
        }
        Ok(SwapSystem { cutoff, basis: QuadratureBasis::new(cutoff) })
    }

    /// Dimension of qubit ⊗ b ⊗ c, the block acted on at each node pair.
    pub fn block_dim(&self) -> usize {
        let n = self.cutoff + 1;
        2 * n * n
    }

    fn swap_matrix(&self, controlled: bool) -> DMatrix<C64> {
        let n = self.cutoff + 1;
        let d = self.block_dim();
        DMatrix::from_fn(d, d, |r, c| {
            let (qr, br, cr) = (r / (n * n), (r / n) % n, r % n);
            let (qc, bc, cc) = (c / (n * n), (c / n) % n, c % n);
            let swapped = controlled.then_some(qr == 1).unwrap_or(true);
            let hit = qr == qc && if swapped { br == cc && cr == bc } else { br == bc && cr == cc };
            if hit {
                ONE
            } else {
                ZERO
            }
        })
    }

    fn qubit_op(&self, u: &[[C64; 2]; 2]) -> DMatrix<C64> {
        let n2 = (self.cutoff + 1).pow(2);
        let d = self.block_dim();
        DMatrix::from_fn(d, d, |r, c| if r % n2 == c % n2 { u[r / n2][c / n2] } else { ZERO })
    }

    /// Composite restricted to the ion-mode node pair `(q_x, q_y)`.
    pub fn composite_block(&self, steps: &[CompositeStep], qx: f64, qy: f64) -> DMatrix<C64> {
        let d = self.block_dim();
        let mut u = DMatrix::identity(d, d);
        let hadamard = qubit_matrix(&GateSpec::Hadamard).unwrap();
        for step in steps {
            let m = match step {
                CompositeStep::RegisterSwap => self.swap_matrix(true),
                CompositeStep::Hadamard => self.qubit_op(&hadamard),
                CompositeStep::ExactW { eta } => self.qubit_op(&GateSpec::W { eta: *eta }.quadrature_block(qx, qy)),
                CompositeStep::CommutatorW(seq) => {
                    let mut b = [[ONE, ZERO], [ZERO, ONE]];
                    for g in &seq.gates {
                        b = mul2(&g.quadrature_block(qx, qy), &b);
                    }
                    self.qubit_op(&b)
                }
            };
            u = m * u;
        }
        u
    }

    /// `e^{iδt θ σ_x ⊗ S} = cos(δtθ) + i sin(δtθ) σ_x ⊗ S` at `θ = q_x q_y`.
    pub fn target_block(&self, dt: f64, qx: f64, qy: f64) -> DMatrix<C64> {
        let d = self.block_dim();
        let x = [[ZERO, ONE], [ONE, ZERO]];
        let xs = self.qubit_op(&x) * self.swap_matrix(false);
        let (s, c) = (dt * qx * qy).sin_cos();
        DMatrix::<C64>::identity(d, d) * C64::from(c) + xs * (I * s)
    }

    /// `max` over node pairs of the block spectral-norm distance; equal to
    /// the operator distance on the whole truncated space.
    pub fn composite_error(&self, steps: &[CompositeStep], dt: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for &qx in &self.basis.nodes {
            for &qy in &self.basis.nodes {
                let diff = self.composite_block(steps, qx, qy) - self.target_block(dt, qx, qy);
                worst = worst.max(spectral_norm(diff));
            }
        }
        worst
    }

    /// Distance of a bare `W` step from `W(η)` on the same truncated space.
    pub fn w_error(&self, step: &CompositeStep) -> f64 {
        let mut worst: f64 = 0.0;
        if let CompositeStep::CommutatorW(seq) = step {
            let eta = 2.0 * seq.repetitions as f64 * seq.effective_dt.powi(2)
                * match seq.gates.first() {
                    Some(GateSpec::DiracX { g, .. }) => g * g,
                    Some(GateSpec::DiracY { g, .. }) => -g * g,
                    _ => 0.0,
                };
            for &qx in &self.basis.nodes {
                for &qy in &self.basis.nodes {
                    let mut b = [[ONE, ZERO], [ZERO, ONE]];
                    for g in &seq.gates {
                        b = mul2(&g.quadrature_block(qx, qy), &b);
                    }
                    worst = worst.max(block_distance(&b, &GateSpec::W { eta }.quadrature_block(qx, qy)));
                }
            }
        }
        worst
    }

    pub fn nodes(&self) -> &[f64] {
        &self.basis.nodes
    }
}

// Swap test -----------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwapTestOutcome {
    /// Circuit probability of reading the control as `|0⟩`.
    pub p_exact: f64,
    pub p_hat: f64,
    pub shots: u64,
    pub leakage: f64,
    pub reliable: bool,
}

/// Hadamard, controlled swap of the two modes, Hadamard, then sample the
/// control outcome `shots` times.
pub fn gate_level_swap_test(a: &DVector<C64>, b: &DVector<C64>, shots: u64, seed: u64) -> Result<SwapTestOutcome> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    if shots == 0 {
        return Err(Error::InvalidArgument("swap test needs at least one shot".into()));
    }
    let start = HybridState::product([ONE, ZERO], a, b)?;
    let out = apply_sequence(&start, &[GateSpec::Hadamard, GateSpec::ControlledSwap, GateSpec::Hadamard])?;
    let p_exact = out.state.qubit_probability(0).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = Binomial::new(shots, p_exact)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?
        .sample(&mut rng);
    let leakage = start.leakage();
    Ok(SwapTestOutcome {
        p_exact,
        p_hat: hits as f64 / shots as f64,
        shots,
        leakage,
        reliable: leakage < LEAKAGE_THRESHOLD,
    })
}
