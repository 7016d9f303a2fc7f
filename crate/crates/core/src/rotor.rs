//! Basic objects of the planar rotor: interaction strengths, the periodic
//! angular grid, wavefunctions sampled on it and free-rotor states.
//!
//! Everything is dimensionless. Energies are in units of the rotational
//! constant and time in units of hbar over the rotational constant, so the
//! rotational period is 2π.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PendulumError, Result};

/// Default number of angular grid points.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Relative tolerance used to decide whether κ sits on an integer.
pub const KAPPA_INTEGER_TOL: f64 = 1e-9;

/// Strengths of the orienting (`-eta cos θ`) and aligning (`-zeta cos² θ`)
/// interactions.
///
/// `eta` is restricted to non-positive values. A positive `eta` is the same
/// potential shifted by π, so only one branch is kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionParams {
    eta: f64,
    zeta: f64,
}

impl InteractionParams {
    pub fn new(eta: f64, zeta: f64) -> Result<Self> {
        if !eta.is_finite() || !zeta.is_finite() {
            return Err(PendulumError::InvalidParameter(format!(
                "non-finite interaction strengths eta = {eta}, zeta = {zeta}"
            )));
        }
        if eta > 0.0 {
            return Err(PendulumError::InvalidParameter(format!(
                "eta must be <= 0 (got {eta}); flip the sign and shift θ by π"
            )));
        }
        if zeta < 0.0 {
            return Err(PendulumError::InvalidParameter(format!("zeta must be >= 0 (got {zeta})")));
        }
        Ok(Self { eta, zeta })
    }

    /// Field-free rotor.
    pub fn free() -> Self {
        Self { eta: 0.0, zeta: 0.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Potential energy at angle `theta`.
    pub fn potential(&self, theta: f64) -> f64 {
        let c = theta.cos();
        -self.eta * c - self.zeta * c * c
    }

    /// The same potential reflected by θ → θ + π, i.e. with `eta` replaced
    /// by `|eta|`. Only meant for internal use by the closed-form ansatz.
    pub(crate) fn mirrored_eta(&self) -> f64 {
        -self.eta
    }
}

/// κ = |η|/√ζ together with its integer classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaReport {
    pub kappa: f64,
    /// Nearest integer when κ is within tolerance of one.
    pub integer: Option<u32>,
}

impl KappaReport {
    /// Odd integer κ: locus of genuine crossings.
    pub fn is_genuine_locus(&self) -> bool {
        matches!(self.integer, Some(k) if k % 2 == 1)
    }

    /// Even, non-zero integer κ: locus of avoided crossings.
    pub fn is_avoided_locus(&self) -> bool {
        matches!(self.integer, Some(k) if k > 0 && k % 2 == 0)
    }
}

pub fn topological_index(params: &InteractionParams) -> Result<KappaReport> {
    if params.zeta() <= 0.0 {
        return Err(PendulumError::UndefinedIndex);
    }
    let kappa = params.eta().abs() / params.zeta().sqrt();
    let nearest = kappa.round();
    let integer = if (kappa - nearest).abs() <= KAPPA_INTEGER_TOL * nearest.max(1.0) {
        Some(nearest as u32)
    } else {
        None
    };
    Ok(KappaReport { kappa, integer })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WellKind {
    SingleWell,
    DoubleWell,
    /// |η| = 2ζ exactly: the barrier merges with the local minimum.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeReport {
    pub kind: WellKind,
    /// Barrier angle arccos(-η/(2ζ)); present for double wells.
    pub barrier_angle: Option<f64>,
    pub global_minimum: f64,
    /// Local minimum at θ = 0; present for double wells.
    pub local_minimum: Option<f64>,
    pub v_at_zero: f64,
    pub v_at_pi: f64,
    pub v_at_barrier: Option<f64>,
}

/// Classify V(θ) = -η cos θ - ζ cos² θ.
///
/// V'(θ) = sin θ (η + 2ζ cos θ), so an interior extremum exists iff |η| < 2ζ.
pub fn potential_shape(params: &InteractionParams) -> ShapeReport {
    let (eta, zeta) = (params.eta(), params.zeta());
    let v_at_zero = params.potential(0.0);
    let v_at_pi = params.potential(PI);
    let kind = if zeta == 0.0 || eta.abs() > 2.0 * zeta {
        WellKind::SingleWell
    } else if eta.abs() == 2.0 * zeta {
        WellKind::Boundary
    } else {
        WellKind::DoubleWell
    };
    match kind {
        WellKind::DoubleWell => {
            let barrier = (-eta / (2.0 * zeta)).acos();
            ShapeReport {
                kind,
                barrier_angle: Some(barrier),
                global_minimum: PI,
                local_minimum: Some(0.0),
                v_at_zero,
                v_at_pi,
                v_at_barrier: Some(params.potential(barrier)),
            }
        }
        _ => ShapeReport {
            kind,
            barrier_angle: None,
            global_minimum: if eta == 0.0 && zeta == 0.0 { 0.0 } else { PI },
            local_minimum: None,
            v_at_zero,
            v_at_pi,
            v_at_barrier: None,
        },
    }
}

/// Uniform periodic grid θ_k = 2πk/n on [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngularGrid {
    n_points: usize,
}

pub fn make_grid(n_points: usize) -> Result<AngularGrid> {
    if n_points < 8 {
        return Err(PendulumError::InvalidParameter(format!(
            "grid needs at least 8 points (got {n_points})"
        )));
    }
    if n_points % 2 != 0 {
        return Err(PendulumError::InvalidParameter(format!(
            "grid size must be even (got {n_points})"
        )));
    }
    Ok(AngularGrid { n_points })
}

impl Default for AngularGrid {
    fn default() -> Self {
        Self { n_points: DEFAULT_GRID_POINTS }
    }
}

impl AngularGrid {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dtheta(&self) -> f64 {
        TAU / self.n_points as f64
    }

    pub fn theta(&self, k: usize) -> f64 {
        TAU * k as f64 / self.n_points as f64
    }

    pub fn thetas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |k| self.theta(k))
    }

    /// Largest |J| that survives products with cos² θ without aliasing.
    pub fn max_momentum(&self) -> i64 {
        (self.n_points / 4) as i64
    }

    /// Index of -θ_k on the grid.
    pub fn reflect(&self, k: usize) -> usize {
        (self.n_points - k) % self.n_points
    }

    /// Signed FFT wavenumber of bin `k`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.n_points;
        if k <= n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        }
    }

    /// Trapezoid rule for a periodic integrand sampled on the grid.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.thetas().map(f).sum::<f64>() * self.dtheta()
    }
}

/// Complex amplitudes on an [`AngularGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: AngularGrid,
    amplitudes: Vec<Complex64>,
}

impl Wavefunction {
    /// Wrap raw amplitudes without touching the norm.
    pub fn from_amplitudes(grid: AngularGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(PendulumError::InvalidParameter(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    /// Sample `f` on the grid and normalize.
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: AngularGrid, f: F) -> Result<Self> {
        let amplitudes = grid.thetas().map(f).collect();
        let mut psi = Self { grid, amplitudes };
        psi.normalize()?;
        Ok(psi)
    }

    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dtheta()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(PendulumError::InvalidParameter(format!(
                "cannot normalize a wavefunction of norm {norm}"
            )));
        }
        for a in &mut self.amplitudes {
            *a /= norm;
        }
        Ok(())
    }

    /// ⟨self|other⟩ by the trapezoid rule.
    pub fn inner(&self, other: &Wavefunction) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dtheta()
    }

    /// ⟨ψ|f(θ)|ψ⟩ for a real multiplicative operator.
    pub fn expect_position<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| a.norm_sqr() * f(self.grid.theta(k)))
            .sum::<f64>()
            * self.grid.dtheta()
    }

    pub fn expect_cos(&self) -> f64 {
        self.expect_position(f64::cos)
    }

    pub fn expect_cos2(&self) -> f64 {
        self.expect_position(|t| t.cos().powi(2))
    }

    /// ⟨J²⟩ from the discrete Fourier coefficients.
    pub fn expect_j2(&self) -> f64 {
        let n = self.grid.n_points();
        let spectrum = crate::fourier::forward(&self.amplitudes);
        // Parseval: Σ|ψ_k|² dθ = (2π/n²) Σ|ψ̂_m|²
        spectrum
            .iter()
            .enumerate()
            .map(|(m, c)| self.grid.wavenumber(m).powi(2) * c.norm_sqr())
            .sum::<f64>()
            * TAU
            / (n * n) as f64
    }

    /// L² distance ‖self − other‖.
    pub fn distance(&self, other: &Wavefunction) -> f64 {
        (self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * self.grid.dtheta())
        .sqrt()
    }

    /// Norms of the even and odd parts under θ → −θ.
    pub fn parity_norms(&self) -> (f64, f64) {
        let dtheta = self.grid.dtheta();
        let (mut even, mut odd) = (0.0, 0.0);
        for k in 0..self.grid.n_points() {
            let a = self.amplitudes[k];
            let b = self.amplitudes[self.grid.reflect(k)];
            even += (0.5 * (a + b)).norm_sqr();
            odd += (0.5 * (a - b)).norm_sqr();
        }
        ((even * dtheta).sqrt(), (odd * dtheta).sqrt())
    }
}

/// Free-rotor eigenstate e^{iJθ}/√(2π) with energy J².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RotorState {
    pub j: i64,
}

impl RotorState {
    pub fn new(j: i64) -> Self {
        Self { j }
    }

    pub fn energy(&self) -> f64 {
        (self.j * self.j) as f64
    }
}

pub fn free_rotor_wavefunction(state: RotorState, grid: &AngularGrid) -> Result<Wavefunction> {
    let limit = grid.max_momentum();
    if state.j.abs() > limit {
        return Err(PendulumError::Aliasing { n_points: grid.n_points(), j: state.j, limit });
    }
    let amp = 1.0 / TAU.sqrt();
    let amplitudes = grid
        .thetas()
        .map(|t| Complex64::from_polar(amp, state.j as f64 * t))
        .collect();
    Ok(Wavefunction { grid: *grid, amplitudes })
}

/// Irreducible representation of a periodic eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum SymmetryLabel {
    /// Even under θ → −θ.
    A1,
    /// Odd under θ → −θ.
    A2,
}

impl std::fmt::Display for SymmetryLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymmetryLabel::A1 => write!(f, "A1"),
            SymmetryLabel::A2 => write!(f, "A2"),
        }
    }
}
