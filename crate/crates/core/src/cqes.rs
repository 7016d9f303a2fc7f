//! Conditionally quasi-exactly solvable states.
//!
//! Pendular states are written in the frame rotated by π (where the
//! orienting well sits at θ = 0) as
//!
//! ```text
//! A₁:  e^{√ζ cos θ}        Σ_ℓ v_ℓ cos^{2ℓ}(θ/2)
//! A₂:  e^{√ζ cos θ} sin θ  Σ_ℓ v_ℓ cos^{2ℓ}(θ/2)
//! ```
//!
//! For odd κ = |η|/√ζ the sum terminates and the lowest states of each
//! sector are reproduced exactly by a small tridiagonal eigenproblem.
//! Otherwise the coefficients come from a least-squares projection of the
//! numerical eigenfunction.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::bessel::BesselTable;
use crate::elements::{ansatz_normalization, binomial_row, QUADRATURE_POINTS};
use crate::error::{PendulumError, Result};
use crate::rotor::{make_grid, topological_index, InteractionParams, SymmetryLabel};
use crate::spectrum::PendularSpectrum;
use crate::sudden::{SwitchOffCoefficients, SwitchOnCoefficients};

/// Largest condition number accepted by the projection.
pub const MAX_CONDITION: f64 = 1e12;

/// Ansatz coefficients of one pendular state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnsatzCoefficients {
    pub gamma: SymmetryLabel,
    /// Index of the state in the merged spectrum.
    pub n: usize,
    pub eta: f64,
    pub zeta: f64,
    /// v_0..=v_{ℓ_max}, unit Euclidean norm, Σ v_ℓ > 0.
    pub v: Vec<f64>,
    /// N = ∫ |ansatz|² dθ for the unit-norm v.
    pub normalization: f64,
    /// L² distance between the normalized ansatz and the eigenfunction.
    pub residual: f64,
    /// ±1 with φ_n = phase · ansatz / √N.
    pub phase: f64,
}

impl AnsatzCoefficients {
    pub fn ell_max(&self) -> usize {
        self.v.len() - 1
    }

    /// Normalized ansatz in the original frame, including the phase.
    pub fn reconstruct(&self, theta: f64) -> f64 {
        let t = theta - std::f64::consts::PI;
        let u = (0.5 * t).cos().powi(2);
        let poly = self.v.iter().rev().fold(0.0, |acc, &c| acc * u + c);
        let mut value = (self.zeta.sqrt() * t.cos()).exp() * poly;
        if self.gamma == SymmetryLabel::A2 {
            value *= t.sin();
        }
        self.phase * value / self.normalization.sqrt()
    }
}

/// ℓ_max of the terminating ansatz for an odd topological index, or
/// `None` when the sector has no algebraic states.
pub fn algebraic_ell_max(gamma: SymmetryLabel, kappa: u32) -> Option<usize> {
    if kappa % 2 == 0 {
        return None;
    }
    let k = kappa as usize;
    match gamma {
        SymmetryLabel::A1 => Some((k - 1) / 2),
        SymmetryLabel::A2 => (k >= 3).then(|| (k - 3) / 2),
    }
}

/// Number of algebraic states in a sector for odd κ.
pub fn algebraic_state_count(gamma: SymmetryLabel, kappa: u32) -> usize {
    algebraic_ell_max(gamma, kappa).map_or(0, |l| l + 1)
}

/// Action of H on e^{√ζ cos θ}[sin θ] u^ℓ, u = cos²(θ/2), expressed as a
/// polynomial map in u: returns (coefficient of u^{ℓ+1}, u^ℓ, u^{ℓ−1}).
fn ladder(gamma: SymmetryLabel, ell: usize, abs_eta: f64, zeta: f64) -> (f64, f64, f64) {
    let a = zeta.sqrt();
    let l = ell as f64;
    match gamma {
        SymmetryLabel::A1 => (
            2.0 * a * (2.0 * l + 1.0) - 2.0 * abs_eta,
            l * l - a * (4.0 * l + 1.0) + abs_eta - zeta,
            -l * (2.0 * l - 1.0) / 2.0,
        ),
        SymmetryLabel::A2 => (
            2.0 * a * (2.0 * l + 3.0) - 2.0 * abs_eta,
            (l + 1.0).powi(2) - a * (4.0 * l + 3.0) + abs_eta - zeta,
            -l * (2.0 * l + 1.0) / 2.0,
        ),
    }
}

/// Truncated ladder matrix M with (L P)_ℓ = Σ M_{ℓℓ'} P_ℓ'.
pub fn ladder_matrix(gamma: SymmetryLabel, params: &InteractionParams, ell_max: usize) -> DMatrix<f64> {
    let dim = ell_max + 1;
    let mut m = DMatrix::zeros(dim, dim);
    for l in 0..dim {
        let (up, diag, down) = ladder(gamma, l, params.mirrored_eta(), params.zeta());
        m[(l, l)] = diag;
        if l + 1 < dim {
            m[(l + 1, l)] = up;
        }
        if l > 0 {
            m[(l - 1, l)] = down;
        }
    }
    m
}

/// An exactly solvable state: energy and unit-norm v with Σ v > 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgebraicState {
    pub gamma: SymmetryLabel,
    pub sector_index: usize,
    pub energy: f64,
    pub v: Vec<f64>,
}

/// Algebraic eigenpairs of one sector; empty unless κ is an odd integer.
pub fn algebraic_states(params: &InteractionParams, gamma: SymmetryLabel) -> Result<Vec<AlgebraicState>> {
    if params.zeta() == 0.0 {
        return Ok(Vec::new());
    }
    let report = topological_index(params)?;
    let Some(ell_max) = report.integer.and_then(|k| algebraic_ell_max(gamma, k)) else {
        return Ok(Vec::new());
    };
    let m = ladder_matrix(gamma, params, ell_max);
    let dim = ell_max + 1;
    // M is tridiagonal with positive off-diagonal products; D M D⁻¹ is symmetric
    let mut d = vec![1.0f64; dim];
    for l in 1..dim {
        d[l] = d[l - 1] * (m[(l - 1, l)] / m[(l, l - 1)]).sqrt();
    }
    let mut sym = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        sym[(i, i)] = m[(i, i)];
        if i + 1 < dim {
            let off = m[(i + 1, i)].signum() * (m[(i + 1, i)] * m[(i, i + 1)]).sqrt();
            sym[(i + 1, i)] = off;
            sym[(i, i + 1)] = off;
        }
    }
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(sector_index, i)| {
            let y = eig.eigenvectors.column(i);
            let v: Vec<f64> = (0..dim).map(|l| y[l] / d[l]).collect();
            AlgebraicState { gamma, sector_index, energy: eig.eigenvalues[i], v: orient(v) }
        })
        .collect())
}

/// Unit norm with Σ v > 0 (largest entry positive if the sum vanishes).
fn orient(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sum: f64 = v.iter().sum();
    let sign = if sum.abs() > 1e-8 * norm {
        sum.signum()
    } else {
        let pivot = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        pivot.signum()
    };
    for x in v.iter_mut() {
        *x *= sign / norm;
    }
    v
}

struct Fit {
    phase: f64,
    residual: f64,
}

/// Sampled eigenfunction φ'(θ) = φ_n(θ + π) and the ansatz columns.
struct Projection {
    dtheta: f64,
    target: DVector<f64>,
    columns: DMatrix<f64>,
}

impl Projection {
    fn new(spectrum: &PendularSpectrum, n: usize, ell_max: usize) -> Result<Self> {
        let state = spectrum.state(n)?;
        let grid = make_grid(QUADRATURE_POINTS)?;
        let a = spectrum.params.zeta().sqrt();
        let pts = grid.n_points();
        let target = DVector::from_iterator(pts, grid.thetas().map(|t| state.eval(t + std::f64::consts::PI)));
        let columns = DMatrix::from_fn(pts, ell_max + 1, |k, l| {
            let t = grid.theta(k);
            let mut f = (a * t.cos()).exp() * (0.5 * t).cos().powi(2 * l as i32);
            if state.label == SymmetryLabel::A2 {
                f *= t.sin();
            }
            f
        });
        Ok(Self { dtheta: grid.dtheta(), target, columns })
    }

    fn compare(&self, v: &[f64], normalization: f64) -> Fit {
        let model = &self.columns * DVector::from_column_slice(v) / normalization.sqrt();
        let overlap = model.dot(&self.target) * self.dtheta;
        let phase = if overlap < 0.0 { -1.0 } else { 1.0 };
        let residual = ((&self.target - model * phase).norm_squared() * self.dtheta).sqrt();
        Fit { phase, residual }
    }
}

fn condition_number(columns: &DMatrix<f64>) -> f64 {
    let sv = columns.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn scaled_columns(columns: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let scales: Vec<f64> = columns.column_iter().map(|c| c.norm()).collect();
    let mut scaled = columns.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*s);
    }
    (scaled, scales)
}

/// Least-squares ansatz coefficients for state `n` with ℓ ≤ `ell_max`.
///
/// Fails with [`PendulumError::IllConditioned`] when the column-scaled
/// design matrix has condition number above [`MAX_CONDITION`].
pub fn project_ansatz(spectrum: &PendularSpectrum, n: usize, ell_max: usize) -> Result<AnsatzCoefficients> {
    let proj = Projection::new(spectrum, n, ell_max)?;
    let (scaled, scales) = scaled_columns(&proj.columns);
    let condition = condition_number(&scaled);
    if condition > MAX_CONDITION {
        let suggested = (0..ell_max)
            .rev()
            .find(|&l| condition_number(&scaled.columns(0, l + 1).into_owned()) <= MAX_CONDITION)
            .unwrap_or(0);
        return Err(PendulumError::IllConditioned { condition, ell_max, suggested });
    }
    let svd = scaled.svd(true, true);
    let c = svd
        .solve(&proj.target, 0.0)
        .map_err(|e| PendulumError::Eigensolver(e.to_string()))?;
    let v = orient(c.iter().zip(&scales).map(|(x, s)| x / s).collect());
    finish(spectrum, n, v, &proj)
}

fn finish(spectrum: &PendularSpectrum, n: usize, v: Vec<f64>, proj: &Projection) -> Result<AnsatzCoefficients> {
    let gamma = spectrum.states[n].label;
    let normalization = ansatz_normalization(gamma, &v, spectrum.params.zeta())?;
    let fit = proj.compare(&v, normalization);
    Ok(AnsatzCoefficients {
        gamma,
        n,
        eta: spectrum.params.eta(),
        zeta: spectrum.params.zeta(),
        v,
        normalization,
        residual: fit.residual,
        phase: fit.phase,
    })
}

/// Exact ansatz for state `n` when it is algebraic, `None` otherwise.
pub fn algebraic_ansatz(spectrum: &PendularSpectrum, n: usize) -> Result<Option<AnsatzCoefficients>> {
    let state = spectrum.state(n)?;
    let exact = algebraic_states(&spectrum.params, state.label)?;
    let Some(alg) = exact.into_iter().nth(state.sector_index) else {
        return Ok(None);
    };
    let proj = Projection::new(spectrum, n, alg.v.len() - 1)?;
    finish(spectrum, n, alg.v, &proj).map(Some)
}

/// Ansatz for every state of a spectrum: exact where algebraic, projected
/// with `ell_max` terms elsewhere.
pub fn ansatz_for_spectrum(spectrum: &PendularSpectrum, ell_max: usize) -> Result<Vec<AnsatzCoefficients>> {
    (0..spectrum.n_states())
        .map(|n| match algebraic_ansatz(spectrum, n)? {
            Some(a) => Ok(a),
            None => project_ansatz(spectrum, n, ell_max),
        })
        .collect()
}

/// Mirrored-frame C'_J for one ansatz at Bessel argument √ζ.
fn mirrored_overlap(a: &AnsatzCoefficients, j: i64, table: &BesselTable) -> Complex64 {
    let i = |order: i64| table.get(order);
    let prefactor = (TAU / a.normalization).sqrt();
    let mut total = 0.0;
    for (ell, &v) in a.v.iter().enumerate() {
        let row = binomial_row(2 * ell);
        let centre = row[ell];
        let mut s = 0.0;
        match a.gamma {
            SymmetryLabel::A1 => {
                for (m, c) in row.iter().enumerate().take(ell) {
                    let k = (ell - m) as i64;
                    s += c * (i(j + k) + i(j - k));
                }
                total += v * 0.5f64.powi(2 * ell as i32) * (s + centre * i(j));
            }
            SymmetryLabel::A2 => {
                for (m, c) in row.iter().enumerate().take(ell) {
                    let k = (ell - m) as i64;
                    s += c * (i(j + 1 + k) + i(j + 1 - k) - i(j - 1 + k) - i(j - 1 - k));
                }
                total += v * 0.5f64.powi(2 * ell as i32 + 1) * (s + centre * (i(j + 1) - i(j - 1)));
            }
        }
    }
    match a.gamma {
        SymmetryLabel::A1 => Complex64::new(prefactor * total, 0.0),
        SymmetryLabel::A2 => Complex64::new(0.0, prefactor * total),
    }
}

fn sign_of_j(j: i64) -> f64 {
    if j.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// C_J = ⟨J|φ_n⟩ for J in [−j_max, j_max] from the Bessel sums.
pub fn analytic_switch_off_coefficients(a: &AnsatzCoefficients, j_max: usize) -> Result<SwitchOffCoefficients> {
    let jm = j_max as i64;
    let table = BesselTable::new(j_max + a.v.len() + 2, a.zeta.sqrt())?;
    let values = (-jm..=jm)
        .map(|j| mirrored_overlap(a, j, &table) * (sign_of_j(j) * a.phase))
        .collect();
    SwitchOffCoefficients::new(a.n, a.gamma, j_max, values)
}

/// C^{J0}_n = ⟨φ_n|J0⟩ for one ansatz.
pub fn analytic_switch_on_coefficients(a: &AnsatzCoefficients, j0: i64) -> Result<Complex64> {
    let table = BesselTable::new(j0.unsigned_abs() as usize + a.v.len() + 2, a.zeta.sqrt())?;
    Ok((mirrored_overlap(a, j0, &table) * (sign_of_j(j0) * a.phase)).conj())
}

/// Switch-on coefficients over a whole set of ansatz states.
pub fn analytic_switch_on_set(states: &[AnsatzCoefficients], j0: i64) -> Result<SwitchOnCoefficients> {
    let values = states
        .iter()
        .map(|a| analytic_switch_on_coefficients(a, j0))
        .collect::<Result<Vec<_>>>()?;
    SwitchOnCoefficients::new(j0, states.iter().map(|a| a.gamma).collect(), values)
}
