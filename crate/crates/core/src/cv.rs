//! Two-ancilla-qumode matrix inversion at finite squeezing.
//!
//! Both ancillas start in the momentum-squeezed state whose position
//! wavefunction is `ψ(q) = s^{-1/2} π^{-1/4} exp(-q²/2s²)`. The phase gate
//! `exp(i b q_x q_y)` acts on Schmidt component `i` with `b = λᵢ² + χ`, and
//! projecting both modes back onto `ψ` leaves the amplitude
//!
//! ```text
//! ∬ ψ(q_x)² ψ(q_y)² e^{i b q_x q_y} dq_x dq_y = 1 / sqrt(1 + b² s⁴ / 4)
//!                                            = (2/s²) / sqrt(4/s⁴ + b²)
//! ```
//!
//! [`invert_analytic`] uses the closed form; [`invert_grid`] evaluates the
//! double integral by trapezoid quadrature.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::spectrum::{TrainedState, TrainingState};

/// Ancilla norm deviation beyond which a grid is rejected.
pub const NORM_TOLERANCE: f64 = 1e-4;
/// Largest acceptable aliasing estimate for the phase integral.
pub const ALIAS_TOLERANCE: f64 = 1e-6;

pub const DEFAULT_WIDTH_FACTOR: f64 = 6.0;
pub const DEFAULT_POINTS: usize = 257;

/// Uniform symmetric grid on `[-Q, Q]` with trapezoid weights.
#[derive(Clone, Debug, PartialEq)]
pub struct QumodeGrid {
    pub half_width: f64,
    pub points: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QumodeGrid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0) || points < 3 || points % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid needs Q > 0 and an odd point count >= 3 (got Q={half_width}, G={points})"
            )));
        }
        let c = (points / 2) as i64;
        let h = half_width / c as f64;
        // Integer offsets keep the nodes exactly antisymmetric.
        let nodes: Vec<f64> = (0..points as i64).map(|i| (i - c) as f64 * h).collect();
        let mut weights = vec![h; points];
        weights[0] = h / 2.0;
        weights[points - 1] = h / 2.0;
        Ok(QumodeGrid { half_width, points, nodes, weights })
    }

    /// `Q = 6s`, `G = 257`.
    pub fn default_for(s: f64) -> Result<Self> {
        Self::new(DEFAULT_WIDTH_FACTOR * s, DEFAULT_POINTS)
    }

    pub fn spacing(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezedAncilla {
    pub s: f64,
}

impl SqueezedAncilla {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!("squeezing s must be > 0, got {s}")));
        }
        Ok(SqueezedAncilla { s })
    }

    pub fn wavefunction(&self, q: f64) -> f64 {
        (-q * q / (2.0 * self.s * self.s)).exp() / (self.s.sqrt() * PI.powf(0.25))
    }

    /// `|ψ(q)|²`.
    pub fn density(&self, q: f64) -> f64 {
        (-q * q / (self.s * self.s)).exp() / (self.s * PI.sqrt())
    }

    pub fn grid_norm(&self, grid: &QumodeGrid) -> f64 {
        grid.nodes.iter().zip(&grid.weights).map(|(&q, &w)| w * self.density(q)).sum()
    }
}

/// Post-selection amplitude `1/sqrt(1 + b²s⁴/4)` for phase slope `b`.
pub fn post_selection_amplitude(b: f64, s: f64) -> f64 {
    1.0 / (1.0 + b * b * s.powi(4) / 4.0).sqrt()
}

#[derive(Clone, Debug)]
pub struct PostSelectionResult {
    /// Unnormalized post-selected Schmidt amplitudes.
    pub components: DVector<f64>,
    pub success_probability: f64,
    /// Unit-norm trained state with components ∝ `components`.
    pub normalized_state: TrainedState,
}

impl PostSelectionResult {
    fn assemble(t: &TrainingState, components: DVector<f64>) -> Result<Self> {
        let success_probability = components.norm_squared();
        let n = components.norm();
        let unit = if n > 0.0 { &components / n } else { components.clone() };
        Ok(PostSelectionResult {
            normalized_state: TrainedState::from_components(t, unit)?,
            components,
            success_probability,
        })
    }
}

/// Phase slopes after the regularization gate: `b + χ`.
pub fn regularization_phase(b_values: &[f64], chi: f64) -> Vec<f64> {
    b_values.iter().map(|b| b + chi).collect()
}

fn check_params(s: f64, chi: f64) -> Result<()> {
    SqueezedAncilla::new(s)?;
    if !(chi >= 0.0) || !chi.is_finite() {
        return Err(Error::InvalidArgument(format!("chi must be >= 0, got {chi}")));
    }
    Ok(())
}

fn phase_slopes(t: &TrainingState, coupling: f64, chi: f64) -> Vec<f64> {
    let b: Vec<f64> = t.singular_values.iter().map(|l| coupling * l * l).collect();
    regularization_phase(&b, chi)
}

/// Closed-form channel: `componentsᵢ = λᵢ (2/s²)/sqrt(4/s⁴ + (λᵢ² + χ)²)`.
pub fn invert_analytic(t: &TrainingState, s: f64, chi: f64) -> Result<PostSelectionResult> {
    invert_analytic_with_coupling(t, s, chi, 1.0)
}

/// As [`invert_analytic`] for the phase `exp(i T ρ q_x q_y)` with total
/// coupling `T`.
pub fn invert_analytic_with_coupling(
    t: &TrainingState,
    s: f64,
    chi: f64,
    coupling: f64,
) -> Result<PostSelectionResult> {
    check_params(s, chi)?;
    let b = phase_slopes(t, coupling, chi);
    let components = DVector::from_iterator(
        t.rank(),
        t.singular_values.iter().zip(&b).map(|(l, &b)| l * post_selection_amplitude(b, s)),
    );
    PostSelectionResult::assemble(t, components)
}

#[derive(Clone, Debug)]
pub struct GridInversion {
    pub result: PostSelectionResult,
    /// Largest |imaginary part| of any component quadrature.
    pub imaginary_residual: f64,
    pub ancilla_norm: f64,
    /// Poisson-summation estimate of the trapezoid aliasing error.
    pub alias_estimate: f64,
}

/// `∬ w_j w_k ψ²(q_j) ψ²(q_k) e^{i b q_j q_k}` as (real, imaginary), summed
/// in fixed row-major order.
pub fn phase_integral(b: f64, ancilla: &SqueezedAncilla, grid: &QumodeGrid) -> (f64, f64) {
    let dens: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&q, &w)| w * ancilla.density(q))
        .collect();
    let mut re = 0.0;
    let mut im = 0.0;
    for (j, &qj) in grid.nodes.iter().enumerate() {
        let mut row_re = 0.0;
        let mut row_im = 0.0;
        for (k, &qk) in grid.nodes.iter().enumerate() {
            let (sn, cs) = (b * qj * qk).sin_cos();
            row_re += dens[k] * cs;
            row_im += dens[k] * sn;
        }
        re += dens[j] * row_re;
        im += dens[j] * row_im;
    }
    (re, im)
}

/// Aliasing bound for the inner Gaussian-times-oscillation integral: the
/// nearest alias of frequency `b|q|` sits at `2π/h`, and a Gaussian of
/// width `s` suppresses it by `exp(-(2π/h - b|q|)² s²/4)`.
pub fn alias_estimate(b: f64, ancilla: &SqueezedAncilla, grid: &QumodeGrid) -> f64 {
    let nyquist = 2.0 * PI / grid.spacing();
    let s2 = ancilla.s * ancilla.s;
    grid.nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&q, &w)| {
            let gap = (nyquist - b.abs() * q.abs()).max(0.0);
            w * ancilla.density(q) * (-gap * gap * s2 / 4.0).exp()
        })
        .sum()
}

/// Brute-force quadrature of the same channel.
pub fn invert_grid(t: &TrainingState, s: f64, chi: f64, grid: &QumodeGrid) -> Result<GridInversion> {
    check_params(s, chi)?;
    let ancilla = SqueezedAncilla::new(s)?;
    let ancilla_norm = ancilla.grid_norm(grid);
    if (ancilla_norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::GridTooCoarse(format!(
            "ancilla norm {ancilla_norm} on Q={}, G={}",
            grid.half_width, grid.points
        )));
    }
    let b = phase_slopes(t, 1.0, chi);
    let alias = b.iter().map(|&b| alias_estimate(b, &ancilla, grid)).fold(0.0, f64::max);
    if alias > ALIAS_TOLERANCE {
        return Err(Error::GridTooCoarse(format!(
            "aliasing estimate {alias:.3e} for s={s} on Q={}, G={}",
            grid.half_width, grid.points
        )));
    }
    let mut imaginary_residual: f64 = 0.0;
    let mut comps = Vec::with_capacity(t.rank());
    for (l, &b) in t.singular_values.iter().zip(&b) {
        let (re, im) = phase_integral(b, &ancilla, grid);
        imaginary_residual = imaginary_residual.max(im.abs());
        comps.push(l * re);
    }
    Ok(GridInversion {
        result: PostSelectionResult::assemble(t, DVector::from_vec(comps))?,
        imaginary_residual,
        ancilla_norm,
        alias_estimate: alias,
    })
}

/// Least-squares line through `(ln s, ln P_success)`.
pub fn success_scaling_fit(t: &TrainingState, chi: f64, s_values: &[f64]) -> Result<(f64, f64)> {
    if s_values.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "scaling fit needs at least 3 squeezing values, got {}",
            s_values.len()
        )));
    }
    let mut pts = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let p = invert_analytic(t, s, chi)?.success_probability;
        pts.push((s.ln(), p.ln()));
    }
    Ok(linear_fit(&pts))
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
