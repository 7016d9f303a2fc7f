//! Matrix elements of cos θ and cos² θ between pendular states.
//!
//! Two independent routes are provided. The numeric route integrates the
//! sampled eigenfunctions with the trapezoid rule (spectrally exact for
//! these band-limited states). The analytic route evaluates closed Bessel
//! sums over the ansatz coefficients produced by [`crate::cqes`].

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bessel::BesselTable;
use crate::cqes::AnsatzCoefficients;
use crate::error::{PendulumError, Result};
use crate::rotor::{make_grid, AngularGrid, InteractionParams, SymmetryLabel};
use crate::spectrum::{sector_cos2_matrix, sector_cos_matrix, sector_momenta, solve_spectrum, PendularSpectrum};

/// Grid used by the quadrature oracles.
pub const QUADRATURE_POINTS: usize = 1024;

/// Default finite-difference step for the Hellmann-Feynman check.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Largest half-angle power supported by the Bessel expansions.
pub const MAX_HALF_ANGLE_POWER: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Cos,
    Cos2,
}

impl Operator {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            Operator::Cos => theta.cos(),
            Operator::Cos2 => theta.cos().powi(2),
        }
    }
}

/// ⟨φ_n|op|φ_n'⟩ tagged with the states' symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionElement {
    pub n: usize,
    pub n_prime: usize,
    pub gamma: SymmetryLabel,
    pub operator: Operator,
    pub value: f64,
}

/// Weight f(θ) multiplying e^{2√ζ cos θ} cos^{2L}(θ/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpCosWeight {
    One,
    Cos,
    Cos2,
    /// sin² θ, the A₂ normalization weight.
    Sin2,
    /// sin² θ cos θ (A₂ orientation).
    Sin2Cos,
    /// sin² θ cos² θ (A₂ alignment).
    Sin2Cos2,
}

impl ExpCosWeight {
    /// Cosine-series coefficients of the weight.
    fn series(&self) -> CosineSeries {
        let c = match self {
            ExpCosWeight::One => vec![1.0],
            ExpCosWeight::Cos => vec![0.0, 1.0],
            ExpCosWeight::Cos2 => vec![0.5, 0.0, 0.5],
            ExpCosWeight::Sin2 => vec![0.5, 0.0, -0.5],
            ExpCosWeight::Sin2Cos => vec![0.0, 0.25, 0.0, -0.25],
            ExpCosWeight::Sin2Cos2 => vec![0.125, 0.0, 0.0, 0.0, -0.125],
        };
        CosineSeries(c)
    }
}

/// Σ_k c_k cos(kθ).
#[derive(Debug, Clone, PartialEq)]
struct CosineSeries(Vec<f64>);

impl CosineSeries {
    /// cos^{2L}(θ/2) = 2^{−2L} [C(2L, L) + 2 Σ_{m<L} C(2L, m) cos((L−m)θ)].
    fn half_angle_power(power: usize) -> Self {
        let row = binomial_row(2 * power);
        let scale = 0.5f64.powi(2 * power as i32);
        let mut c = vec![0.0; power + 1];
        c[0] = row[power] * scale;
        for m in 0..power {
            c[power - m] = 2.0 * row[m] * scale;
        }
        CosineSeries(c)
    }

    fn mul(&self, other: &CosineSeries) -> CosineSeries {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (a, &ca) in self.0.iter().enumerate() {
            for (b, &cb) in other.0.iter().enumerate() {
                let w = 0.5 * ca * cb;
                out[a + b] += w;
                out[a.abs_diff(b)] += w;
            }
        }
        CosineSeries(out)
    }

    /// ∫_0^{2π} e^{x cos θ} Σ c_k cos(kθ) dθ = 2π Σ c_k I_k(x).
    fn integrate_against_exp(&self, table: &BesselTable) -> f64 {
        TAU * self.0.iter().enumerate().map(|(k, c)| c * table.get(k as i64)).sum::<f64>()
    }
}

/// Row 2L of Pascal's triangle as f64.
pub(crate) fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0f64; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    row
}

/// ∫_0^{2π} e^{2√ζ cos θ} f(θ) cos^{2L}(θ/2) dθ through the half-angle
/// binomial expansion and product-to-sum reduction onto Bessel functions.
pub fn exp_cos_integral(half_power: usize, zeta: f64, weight: ExpCosWeight) -> Result<f64> {
    if zeta < 0.0 {
        return Err(PendulumError::InvalidParameter(format!("zeta must be >= 0 (got {zeta})")));
    }
    if half_power > MAX_HALF_ANGLE_POWER {
        return Err(PendulumError::InvalidParameter(format!(
            "L = {half_power} exceeds {MAX_HALF_ANGLE_POWER}"
        )));
    }
    let series = CosineSeries::half_angle_power(half_power).mul(&weight.series());
    let table = BesselTable::new(series.0.len(), 2.0 * zeta.sqrt())?;
    Ok(series.integrate_against_exp(&table))
}

/// Closed forms of ∫ e^{2√ζ cos θ} f(θ) cos^{2L}(θ/2) dθ / 2π, written
/// term by term over m as in the half-angle expansion.
struct PairKernels<'a> {
    table: &'a BesselTable,
    sqrt_zeta: f64,
}

impl PairKernels<'_> {
    fn i(&self, order: i64) -> f64 {
        self.table.get(order)
    }

    fn sum_over_m(&self, l: usize, term: impl Fn(i64) -> f64) -> (f64, f64) {
        let row = binomial_row(2 * l);
        let mut s = 0.0;
        for m in 0..l {
            s += row[m] * term((l - m) as i64);
        }
        (row[l], s)
    }

    fn norm_a1(&self, l: usize) -> f64 {
        let (centre, s) = self.sum_over_m(l, |k| self.i(k));
        (centre * self.i(0) + 2.0 * s) * 0.5f64.powi(2 * l as i32)
    }

    fn norm_a2(&self, l: usize) -> f64 {
        let (centre, s) = self.sum_over_m(l, |k| 2.0 * self.i(k) - self.i(k - 2) - self.i(k + 2));
        // I_1/√ζ = I_0 − I_2 at argument 2√ζ; the undivided form covers ζ = 0
        let lead = if self.sqrt_zeta > 0.0 { self.i(1) / self.sqrt_zeta } else { self.i(0) - self.i(2) };
        (centre * lead + s) * 0.5f64.powi(2 * l as i32 + 1)
    }

    fn cos_a1(&self, l: usize) -> f64 {
        let (centre, s) = self.sum_over_m(l, |k| self.i(k - 1) + self.i(k + 1));
        (centre * self.i(1) + s) * 0.5f64.powi(2 * l as i32)
    }

    fn cos_a2(&self, l: usize) -> f64 {
        if self.sqrt_zeta > 0.0 {
            let (centre, s) = self.sum_over_m(l, |k| {
                (k + 2) as f64 * self.i(k + 2) - (k - 2) as f64 * self.i(k - 2)
            });
            (centre * 2.0 * self.i(2) + s) * 0.5f64.powi(2 * l as i32 + 2) / self.sqrt_zeta
        } else {
            // same integral before applying the Bessel recurrence
            let (centre, s) = self.sum_over_m(l, |k| {
                self.i(k - 1) + self.i(k + 1) - self.i(k - 3) - self.i(k + 3)
            });
            (centre * (self.i(1) - self.i(3)) + s) * 0.5f64.powi(2 * l as i32 + 2)
        }
    }

    fn cos2_a1(&self, l: usize) -> f64 {
        let (centre, s) = self.sum_over_m(l, |k| 2.0 * self.i(k) + self.i(k + 2) + self.i(k - 2));
        (centre * (self.i(0) + self.i(2)) + s) * 0.5f64.powi(2 * l as i32 + 1)
    }

    fn cos2_a2(&self, l: usize) -> f64 {
        let (centre, s) = self.sum_over_m(l, |k| 2.0 * self.i(k) - self.i(k + 4) - self.i(k - 4));
        (centre * (self.i(0) - self.i(4)) + s) * 0.5f64.powi(2 * l as i32 + 3)
    }
}

fn double_sum(v: &[f64], w: &[f64], kernel: impl Fn(usize) -> f64) -> f64 {
    let mut total = 0.0;
    for (l, &vl) in v.iter().enumerate() {
        for (lp, &wl) in w.iter().enumerate() {
            total += vl * wl * kernel(l + lp);
        }
    }
    total
}

fn kernel_table(zeta: f64, max_power: usize) -> Result<BesselTable> {
    BesselTable::new(max_power + 6, 2.0 * zeta.sqrt())
}

/// Normalization N of the ansatz Σ v_ℓ e^{√ζ cos θ} [sin θ] cos^{2ℓ}(θ/2).
pub fn ansatz_normalization(gamma: SymmetryLabel, v: &[f64], zeta: f64) -> Result<f64> {
    let table = kernel_table(zeta, 2 * v.len())?;
    let k = PairKernels { table: &table, sqrt_zeta: zeta.sqrt() };
    let sum = match gamma {
        SymmetryLabel::A1 => double_sum(v, v, |l| k.norm_a1(l)),
        SymmetryLabel::A2 => double_sum(v, v, |l| k.norm_a2(l)),
    };
    Ok(TAU * sum)
}

fn analytic_element(a: &AnsatzCoefficients, b: &AnsatzCoefficients, op: Operator) -> Result<f64> {
    if a.gamma != b.gamma {
        return Ok(0.0);
    }
    if (a.zeta - b.zeta).abs() > 1e-12 * a.zeta.max(1.0) {
        return Err(PendulumError::InvalidParameter(format!(
            "ansatz sets belong to different zeta ({} vs {})",
            a.zeta, b.zeta
        )));
    }
    let table = kernel_table(a.zeta, a.v.len() + b.v.len())?;
    let k = PairKernels { table: &table, sqrt_zeta: a.zeta.sqrt() };
    let g = TAU / (a.normalization * b.normalization).sqrt();
    let mirrored = match (a.gamma, op) {
        (SymmetryLabel::A1, Operator::Cos) => double_sum(&a.v, &b.v, |l| k.cos_a1(l)),
        (SymmetryLabel::A2, Operator::Cos) => double_sum(&a.v, &b.v, |l| k.cos_a2(l)),
        (SymmetryLabel::A1, Operator::Cos2) => double_sum(&a.v, &b.v, |l| k.cos2_a1(l)),
        (SymmetryLabel::A2, Operator::Cos2) => double_sum(&a.v, &b.v, |l| k.cos2_a2(l)),
    } * g
        * a.phase
        * b.phase;
    // the ansatz lives in the frame shifted by π, where cos θ changes sign
    Ok(match op {
        Operator::Cos => -mirrored,
        Operator::Cos2 => mirrored,
    })
}

/// Bessel-sum value of ⟨φ_n|cos θ|φ_n'⟩; exactly zero across symmetries.
pub fn analytic_cos_element(a: &AnsatzCoefficients, b: &AnsatzCoefficients) -> Result<f64> {
    analytic_element(a, b, Operator::Cos)
}

/// Bessel-sum value of ⟨φ_n|cos² θ|φ_n'⟩; exactly zero across symmetries.
pub fn analytic_cos2_element(a: &AnsatzCoefficients, b: &AnsatzCoefficients) -> Result<f64> {
    analytic_element(a, b, Operator::Cos2)
}

/// Sampled eigenfunctions of a spectrum on the quadrature grid.
pub struct QuadratureStates {
    grid: AngularGrid,
    samples: Vec<Vec<f64>>,
    labels: Vec<SymmetryLabel>,
}

impl QuadratureStates {
    pub fn new(spectrum: &PendularSpectrum) -> Result<Self> {
        Self::with_grid(spectrum, make_grid(QUADRATURE_POINTS)?)
    }

    pub fn with_grid(spectrum: &PendularSpectrum, grid: AngularGrid) -> Result<Self> {
        let samples = (0..spectrum.n_states())
            .map(|n| {
                spectrum
                    .wavefunction(n, &grid)
                    .map(|psi| psi.amplitudes().iter().map(|a| a.re).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(Self { grid, samples, labels: spectrum.labels() })
    }

    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn samples(&self, n: usize) -> &[f64] {
        &self.samples[n]
    }

    pub fn element(&self, n: usize, n_prime: usize, op: Operator) -> TransitionElement {
        let (a, b) = (&self.samples[n], &self.samples[n_prime]);
        let value = a
            .iter()
            .zip(b)
            .enumerate()
            .map(|(k, (x, y))| x * y * op.eval(self.grid.theta(k)))
            .sum::<f64>()
            * self.grid.dtheta();
        TransitionElement { n, n_prime, gamma: self.labels[n], operator: op, value }
    }

    /// ⟨J²⟩_n from a spectral derivative of the samples.
    pub fn kinetic(&self, n: usize) -> f64 {
        let amps: Vec<num_complex::Complex64> =
            self.samples[n].iter().map(|&x| num_complex::Complex64::new(x, 0.0)).collect();
        crate::rotor::Wavefunction::from_amplitudes(self.grid, amps)
            .map(|psi| psi.expect_j2())
            .unwrap_or(f64::NAN)
    }
}

/// Matrix of an operator between every pair of solved states, built from
/// the sector-basis representation. Cross-symmetry entries are zero.
pub fn element_matrix(spectrum: &PendularSpectrum, op: Operator) -> DMatrix<f64> {
    let n = spectrum.n_states();
    let mut out = DMatrix::zeros(n, n);
    for gamma in [SymmetryLabel::A1, SymmetryLabel::A2] {
        let idx = spectrum.sector_indices(gamma);
        if idx.is_empty() {
            continue;
        }
        let basis_op = match op {
            Operator::Cos => sector_cos_matrix(gamma, spectrum.j_max),
            Operator::Cos2 => sector_cos2_matrix(gamma, spectrum.j_max),
        };
        let vecs = DMatrix::from_columns(
            &idx.iter().map(|&i| spectrum.states[i].coeffs.clone()).collect::<Vec<DVector<f64>>>(),
        );
        let m = vecs.transpose() * basis_op * &vecs;
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(i, j)] = m[(a, b)];
            }
        }
    }
    out
}

/// Diagonal of J² over the solved states.
pub fn kinetic_diagonal(spectrum: &PendularSpectrum) -> Vec<f64> {
    spectrum
        .states
        .iter()
        .map(|s| {
            let js = sector_momenta(s.label, spectrum.j_max);
            s.coeffs.iter().zip(js).map(|(c, j)| c * c * (j * j) as f64).sum()
        })
        .collect()
}

/// Absolute Hellmann-Feynman residuals |⟨cos⟩_n + ∂ε_n/∂η| and
/// |⟨cos²⟩_n + ∂ε_n/∂ζ|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HellmannFeynmanResidual {
    pub eta: f64,
    pub zeta: f64,
}

/// ε_n at arbitrary sign of η; the spectrum is even in η because flipping
/// the sign is a rotation by π.
fn energy_at(eta: f64, zeta: f64, n: usize, j_max: usize) -> Result<f64> {
    let p = InteractionParams::new(-eta.abs(), zeta)?;
    Ok(solve_spectrum(&p, n + 1, j_max)?.states[n].energy)
}

pub fn hellmann_feynman_residual(
    params: &InteractionParams,
    n: usize,
    step: f64,
    j_max: usize,
) -> Result<HellmannFeynmanResidual> {
    if !(step > 0.0) {
        return Err(PendulumError::InvalidParameter(format!("step must be > 0 (got {step})")));
    }
    if params.zeta() < step {
        return Err(PendulumError::InvalidParameter(format!(
            "zeta = {} too small for a central difference with step {step}",
            params.zeta()
        )));
    }
    let spectrum = solve_spectrum(params, (n + 2).min(2 * j_max), j_max)?;
    let gap = spectrum.neighbour_gap(n);
    if gap <= 10.0 * step {
        return Err(PendulumError::DegenerateState { n, gap });
    }
    let quad = QuadratureStates::new(&spectrum)?;
    let cos_n = quad.element(n, n, Operator::Cos).value;
    let cos2_n = quad.element(n, n, Operator::Cos2).value;
    let (eta, zeta) = (params.eta(), params.zeta());
    let d_eta = (energy_at(eta + step, zeta, n, j_max)? - energy_at(eta - step, zeta, n, j_max)?) / (2.0 * step);
    let d_zeta = (energy_at(eta, zeta + step, n, j_max)? - energy_at(eta, zeta - step, n, j_max)?) / (2.0 * step);
    Ok(HellmannFeynmanResidual { eta: (cos_n + d_eta).abs(), zeta: (cos2_n + d_zeta).abs() })
}

/// |⟨J²⟩_n − ε_n − η⟨cos⟩_n − ζ⟨cos²⟩_n| with every expectation by quadrature.
pub fn kinetic_identity_residual(params: &InteractionParams, n: usize, j_max: usize) -> Result<f64> {
    let spectrum = solve_spectrum(params, n + 1, j_max)?;
    let quad = QuadratureStates::new(&spectrum)?;
    let j2 = quad.kinetic(n);
    let cos = quad.element(n, n, Operator::Cos).value;
    let cos2 = quad.element(n, n, Operator::Cos2).value;
    let e = spectrum.states[n].energy;
    Ok((j2 - e - params.eta() * cos - params.zeta() * cos2).abs())
}

/// Quadrature of e^{2√ζ cos θ} f(θ) cos^{2L}(θ/2), used as a check on the
/// expansions.
pub fn exp_cos_quadrature(half_power: usize, zeta: f64, weight: ExpCosWeight, points: usize) -> Result<f64> {
    let grid = make_grid(points)?;
    let a = 2.0 * zeta.sqrt();
    Ok(grid.integrate(|t| {
        let f = match weight {
            ExpCosWeight::One => 1.0,
            ExpCosWeight::Cos => t.cos(),
            ExpCosWeight::Cos2 => t.cos().powi(2),
            ExpCosWeight::Sin2 => t.sin().powi(2),
            ExpCosWeight::Sin2Cos => t.sin().powi(2) * t.cos(),
            ExpCosWeight::Sin2Cos2 => (t.sin() * t.cos()).powi(2),
        };
        (a * t.cos()).exp() * f * (0.5 * t).cos().powi(2 * half_power as i32)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(eta: f64, zeta: f64) -> InteractionParams {
        InteractionParams::new(eta, zeta).unwrap()
    }

    #[test]
    fn exp_cos_integral_leading_terms() {
        let t = BesselTable::new(4, 10.0).unwrap();
        let v = exp_cos_integral(0, 25.0, ExpCosWeight::Cos).unwrap();
        assert!((v - TAU * t.get(1)).abs() < 1e-12 * v);
        assert!((exp_cos_integral(0, 0.0, ExpCosWeight::One).unwrap() - TAU).abs() < 1e-14);
        assert!(exp_cos_integral(41, 1.0, ExpCosWeight::One).is_err());
    }

    #[test]
    fn exp_cos_integral_matches_quadrature() {
        let weights = [
            ExpCosWeight::One,
            ExpCosWeight::Cos,
            ExpCosWeight::Cos2,
            ExpCosWeight::Sin2,
            ExpCosWeight::Sin2Cos,
            ExpCosWeight::Sin2Cos2,
        ];
        for &w in &weights {
            for &(l, zeta) in &[(3usize, 25.0), (0, 4.0), (7, 16.0), (12, 1.0), (2, 0.0)] {
                let series = exp_cos_integral(l, zeta, w).unwrap();
                let quad = exp_cos_quadrature(l, zeta, w, 2048).unwrap();
                let scale = exp_cos_quadrature(l, zeta, ExpCosWeight::One, 2048).unwrap();
                assert!(
                    (series - quad).abs() < 1e-12 * scale,
                    "{w:?} L={l} zeta={zeta}: {series} vs {quad}"
                );
            }
        }
    }

    #[test]
    fn closed_kernels_match_series_route() {
        for &zeta in &[0.0, 0.7, 9.0, 25.0] {
            let table = kernel_table(zeta, 24).unwrap();
            let k = PairKernels { table: &table, sqrt_zeta: zeta.sqrt() };
            for l in 0..12 {
                let cases: [(f64, ExpCosWeight); 6] = [
                    (k.norm_a1(l), ExpCosWeight::One),
                    (k.norm_a2(l), ExpCosWeight::Sin2),
                    (k.cos_a1(l), ExpCosWeight::Cos),
                    (k.cos_a2(l), ExpCosWeight::Sin2Cos),
                    (k.cos2_a1(l), ExpCosWeight::Cos2),
                    (k.cos2_a2(l), ExpCosWeight::Sin2Cos2),
                ];
                let scale = exp_cos_integral(l, zeta, ExpCosWeight::One).unwrap() / TAU;
                for (closed, w) in cases {
                    let series = exp_cos_integral(l, zeta, w).unwrap() / TAU;
                    assert!(
                        (closed - series).abs() < 1e-13 * scale,
                        "{w:?} L={l} zeta={zeta}: {closed} vs {series}"
                    );
                }
            }
        }
    }

    #[test]
    fn element_matrix_matches_quadrature_and_selection_rules() {
        let s = solve_spectrum(&params(-8.0, 20.0), 9, 64).unwrap();
        let quad = QuadratureStates::new(&s).unwrap();
        for op in [Operator::Cos, Operator::Cos2] {
            let m = element_matrix(&s, op);
            for a in 0..9 {
                for b in 0..9 {
                    let q = quad.element(a, b, op).value;
                    assert!((m[(a, b)] - q).abs() < 1e-12, "{op:?} ({a},{b})");
                    if s.states[a].label != s.states[b].label {
                        assert!(q.abs() < 1e-12);
                        assert_eq!(m[(a, b)], 0.0);
                    }
                    assert!((m[(a, b)] - m[(b, a)]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn kinetic_identity_free_rotor() {
        let r = kinetic_identity_residual(&InteractionParams::free(), 2, 16).unwrap();
        assert!(r < 1e-12);
        let s = solve_spectrum(&InteractionParams::free(), 3, 16).unwrap();
        let q = QuadratureStates::new(&s).unwrap();
        assert!((q.kinetic(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kinetic_identity_pendular() {
        assert!(kinetic_identity_residual(&params(-10.0, 25.0), 0, 64).unwrap() < 1e-9);
        assert!(kinetic_identity_residual(&params(-25.0, 25.0), 4, 64).unwrap() < 1e-9);
    }

    #[test]
    fn hellmann_feynman_examples() {
        let r = hellmann_feynman_residual(&params(-7.0, 25.0), 0, 1e-4, 64).unwrap();
        assert!(r.eta < 1e-6 && r.zeta < 1e-6, "{r:?}");

        let s = solve_spectrum(&params(0.0, 25.0), 1, 64).unwrap();
        let q = QuadratureStates::new(&s).unwrap();
        // eigensolver mixing inside the 0.004-wide doublet sets the floor here
        assert!(q.element(0, 0, Operator::Cos).value.abs() < 1e-10);
        let sym = hellmann_feynman_residual(&params(0.0, 25.0), 0, 1e-4, 64).unwrap();
        assert!(sym.eta < 1e-9);

        assert!(matches!(
            hellmann_feynman_residual(&params(-5.0, 25.0), 1, 1e-4, 64),
            Err(PendulumError::DegenerateState { n: 1, .. })
        ));
    }
}
