//! Observables after a sudden switch of the interactions.
//!
//! Switch-off: a pendular state φ_{n0} is released into the free rotor and
//! expanded over e^{iJθ}/√(2π). Switch-on: a free rotor state |J0⟩ is
//! projected onto the pendular states of the new Hamiltonian.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::elements::{element_matrix, Operator, QUADRATURE_POINTS};
use crate::error::{PendulumError, Result};
use crate::rotor::{make_grid, InteractionParams, SymmetryLabel};
use crate::spectrum::{solve_full_spectrum, PendularSpectrum};

/// Tolerance on Σ|C|² = 1.
pub const COMPLETENESS_TOL: f64 = 1e-8;

/// Population below which a state is ignored in the coherence analysis.
pub const POPULATED_THRESHOLD: f64 = 1e-4;

/// Default τ sampling.
pub const SAMPLES_PER_PERIOD: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    Cos,
    Cos2,
    J2,
    Energy,
}

impl Observable {
    pub fn name(&self) -> &'static str {
        match self {
            Observable::Cos => "cos",
            Observable::Cos2 => "cos2",
            Observable::J2 => "j2",
            Observable::Energy => "energy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationSeries {
    pub observable: Observable,
    pub tau_grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl ExpectationSeries {
    /// Largest |a(τ) − b(τ)| over two series on the same grid.
    pub fn max_deviation(&self, other: &ExpectationSeries) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn check_bounds(&self) -> Result<()> {
        let slack = 1e-10;
        let bad = self.values.iter().find(|&&v| match self.observable {
            Observable::Cos => !(v.abs() <= 1.0 + slack),
            Observable::Cos2 => !(-slack..=1.0 + slack).contains(&v),
            Observable::J2 => !(v >= -slack),
            Observable::Energy => !v.is_finite(),
        });
        match bad {
            Some(v) => Err(PendulumError::NonFinite { step: self.values.iter().position(|x| x == v).unwrap_or(0) }),
            None => Ok(()),
        }
    }
}

/// τ_k = k·τ_end/(samples−1), k = 0..samples.
pub fn tau_grid(tau_end: f64, samples: usize) -> Vec<f64> {
    if samples < 2 {
        return vec![0.0];
    }
    (0..samples).map(|k| tau_end * k as f64 / (samples - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PopulationIndex {
    Rotor { j: i64 },
    Pendular { gamma: SymmetryLabel, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PopulationRecord {
    pub index: PopulationIndex,
    pub probability: f64,
}

/// C_J = ⟨J|φ_{n0}⟩ for J in [−j_max, j_max].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchOffCoefficients {
    pub n0: usize,
    pub gamma: SymmetryLabel,
    pub j_max: usize,
    values: Vec<Complex64>,
}

impl SwitchOffCoefficients {
    pub fn new(n0: usize, gamma: SymmetryLabel, j_max: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != 2 * j_max + 1 {
            return Err(PendulumError::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                2 * j_max + 1,
                values.len()
            )));
        }
        Ok(Self { n0, gamma, j_max, values })
    }

    /// Exact overlaps read off the sector eigenvector.
    pub fn from_spectrum(spectrum: &PendularSpectrum, n0: usize, j_max: usize) -> Result<Self> {
        let state = spectrum.state(n0)?;
        let jm = j_max as i64;
        let values = (-jm..=jm).map(|j| state.rotor_overlap(j)).collect();
        Self::new(n0, state.label, j_max, values)
    }

    /// C_J for any J; zero outside the stored window.
    pub fn get(&self, j: i64) -> Complex64 {
        if j.unsigned_abs() as usize > self.j_max {
            return Complex64::default();
        }
        self.values[(j + self.j_max as i64) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn momenta(&self) -> impl Iterator<Item = i64> {
        let jm = self.j_max as i64;
        -jm..=jm
    }

    pub fn total_probability(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn parseval_defect(&self) -> f64 {
        (1.0 - self.total_probability()).abs()
    }

    /// Largest violation of C_{−J} = ±C_J, of the reality (A₁) or pure
    /// imaginarity (A₂) of the C_J, and of C_0 = 0 for A₂.
    pub fn symmetry_defect(&self) -> f64 {
        let sign = match self.gamma {
            SymmetryLabel::A1 => 1.0,
            SymmetryLabel::A2 => -1.0,
        };
        let mut worst = 0.0f64;
        for j in 0..=self.j_max as i64 {
            worst = worst.max((self.get(-j) - self.get(j) * sign).norm());
            let c = self.get(j);
            worst = worst.max(match self.gamma {
                SymmetryLabel::A1 => c.im.abs(),
                SymmetryLabel::A2 => c.re.abs(),
            });
        }
        if self.gamma == SymmetryLabel::A2 {
            worst = worst.max(self.get(0).norm());
        }
        worst
    }

    /// P(J) for J ≥ 0, folding ±J together.
    pub fn populations(&self) -> Vec<PopulationRecord> {
        (0..=self.j_max as i64)
            .map(|j| {
                let p = if j == 0 { self.get(0).norm_sqr() } else { self.get(j).norm_sqr() + self.get(-j).norm_sqr() };
                PopulationRecord { index: PopulationIndex::Rotor { j }, probability: p }
            })
            .collect()
    }

    /// Σ_J C_J e^{iJθ}/√(2π) at one angle.
    pub fn reconstruct(&self, theta: f64) -> Complex64 {
        self.momenta()
            .map(|j| self.get(j) * Complex64::from_polar(1.0, j as f64 * theta))
            .sum::<Complex64>()
            / TAU.sqrt()
    }
}

/// C^{J0}_n = ⟨φ_n|J0⟩ over the states of one spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchOnCoefficients {
    pub j0: i64,
    labels: Vec<SymmetryLabel>,
    values: Vec<Complex64>,
}

impl SwitchOnCoefficients {
    pub fn new(j0: i64, labels: Vec<SymmetryLabel>, values: Vec<Complex64>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(PendulumError::InvalidParameter(format!(
                "{} labels for {} coefficients",
                labels.len(),
                values.len()
            )));
        }
        Ok(Self { j0, labels, values })
    }

    /// Exact overlaps read off the sector eigenvectors.
    pub fn from_spectrum(spectrum: &PendularSpectrum, j0: i64) -> Result<Self> {
        let values = spectrum.states.iter().map(|s| s.rotor_overlap(-j0)).collect();
        Self::new(j0, spectrum.labels(), values)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn labels(&self) -> &[SymmetryLabel] {
        &self.labels
    }

    pub fn total_probability(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn parseval_defect(&self) -> f64 {
        (1.0 - self.total_probability()).abs()
    }

    /// Largest imaginary part of an A₁ coefficient, real part of an A₂
    /// coefficient, or A₂ coefficient at J0 = 0.
    pub fn symmetry_defect(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.labels)
            .map(|(c, g)| match g {
                SymmetryLabel::A1 => c.im.abs(),
                SymmetryLabel::A2 if self.j0 == 0 => c.norm(),
                SymmetryLabel::A2 => c.re.abs(),
            })
            .fold(0.0, f64::max)
    }

    /// One record per state, indexed by its position in the merged spectrum.
    pub fn populations(&self) -> Vec<PopulationRecord> {
        self.values
            .iter()
            .zip(&self.labels)
            .enumerate()
            .map(|(n, (c, &gamma))| PopulationRecord {
                index: PopulationIndex::Pendular { gamma, n },
                probability: c.norm_sqr(),
            })
            .collect()
    }

    /// Number of leading states whose cumulative population exceeds
    /// 1 − [`COMPLETENESS_TOL`], or all of them.
    pub fn n_max(&self) -> usize {
        let mut total = 0.0;
        for (n, c) in self.values.iter().enumerate() {
            total += c.norm_sqr();
            if total > 1.0 - COMPLETENESS_TOL {
                return n + 1;
            }
        }
        self.values.len()
    }
}

/// C_J by trapezoid quadrature of ∫ e^{−iJθ} φ_{n0}(θ) dθ/√(2π).
pub fn switch_off_coefficients(spectrum: &PendularSpectrum, n0: usize, j_max: usize) -> Result<SwitchOffCoefficients> {
    let state = spectrum.state(n0)?;
    let grid = make_grid(QUADRATURE_POINTS)?;
    let samples: Vec<f64> = grid.thetas().map(|t| state.eval(t)).collect();
    let jm = j_max as i64;
    let scale = grid.dtheta() / TAU.sqrt();
    let values = (-jm..=jm)
        .map(|j| {
            samples
                .iter()
                .enumerate()
                .map(|(k, &f)| Complex64::from_polar(f, -(j as f64) * grid.theta(k)))
                .sum::<Complex64>()
                * scale
        })
        .collect();
    SwitchOffCoefficients::new(n0, state.label, j_max, values)
}

/// C^{J0}_n by trapezoid quadrature of ∫ φ_n(θ) e^{iJ0θ} dθ/√(2π).
pub fn switch_on_coefficients(spectrum: &PendularSpectrum, j0: i64) -> Result<SwitchOnCoefficients> {
    let grid = make_grid(QUADRATURE_POINTS)?;
    let scale = grid.dtheta() / TAU.sqrt();
    let phases: Vec<Complex64> = grid.thetas().map(|t| Complex64::from_polar(1.0, j0 as f64 * t)).collect();
    let values = spectrum
        .states
        .iter()
        .map(|s| grid.thetas().zip(&phases).map(|(t, p)| p * s.eval(t)).sum::<Complex64>() * scale)
        .collect();
    SwitchOnCoefficients::new(j0, spectrum.labels(), values)
}

pub fn switch_off_populations(spectrum: &PendularSpectrum, n0: usize, j_max: usize) -> Result<Vec<PopulationRecord>> {
    Ok(switch_off_coefficients(spectrum, n0, j_max)?.populations())
}

pub fn switch_on_populations(spectrum: &PendularSpectrum, j0: i64) -> Result<Vec<PopulationRecord>> {
    Ok(switch_on_coefficients(spectrum, j0)?.populations())
}

/// Free-rotor evolution after switch-off.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchOffSeries {
    pub cos: ExpectationSeries,
    pub cos2: ExpectationSeries,
    pub j2: ExpectationSeries,
}

pub fn switch_off_evolution(coeffs: &SwitchOffCoefficients, tau_grid: &[f64]) -> Result<SwitchOffSeries> {
    let jm = coeffs.j_max as i64;
    let j2_value: f64 = coeffs.momenta().map(|j| (j * j) as f64 * coeffs.get(j).norm_sqr()).sum();
    let norm = coeffs.total_probability();
    let mut cos = Vec::with_capacity(tau_grid.len());
    let mut cos2 = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        // ΔJ = 1 terms oscillate at (J+1)² − J² = 2J + 1, ΔJ = 2 at 4(J+1)
        let (mut c1, mut c2) = (Complex64::default(), Complex64::default());
        for j in -jm..=jm {
            let cj = coeffs.get(j);
            if j < jm {
                c1 += coeffs.get(j + 1).conj() * cj * Complex64::from_polar(1.0, (2 * j + 1) as f64 * tau);
            }
            if j + 2 <= jm {
                c2 += coeffs.get(j + 2).conj() * cj * Complex64::from_polar(1.0, (4 * (j + 1)) as f64 * tau);
            }
        }
        cos.push(c1.re);
        cos2.push(0.5 * norm + 0.5 * c2.re);
    }
    let series = |observable, values| ExpectationSeries { observable, tau_grid: tau_grid.to_vec(), values };
    let out = SwitchOffSeries {
        cos: series(Observable::Cos, cos),
        cos2: series(Observable::Cos2, cos2),
        j2: series(Observable::J2, vec![j2_value; tau_grid.len()]),
    };
    out.cos.check_bounds()?;
    out.cos2.check_bounds()?;
    Ok(out)
}

/// Pendular-state evolution after switch-on, with ⟨cos θ⟩ split into its
/// population part and the per-sector coherence series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchOnSeries {
    pub cos: ExpectationSeries,
    pub cos2: ExpectationSeries,
    pub j2: ExpectationSeries,
    pub energy: ExpectationSeries,
    pub cos_population: f64,
    pub cos_coherence_a1: Vec<f64>,
    pub cos_coherence_a2: Vec<f64>,
    /// Number of states kept in the coherence sums.
    pub n_max: usize,
}

fn check_matching(spectrum: &PendularSpectrum, coeffs: &SwitchOnCoefficients) -> Result<()> {
    if coeffs.values.len() != spectrum.n_states() || coeffs.labels != spectrum.labels() {
        return Err(PendulumError::InvalidParameter(
            "switch-on coefficients do not belong to this spectrum".into(),
        ));
    }
    Ok(())
}

/// Population and coherence parts of ⟨S⟩(τ) for one operator matrix.
struct Decomposition {
    population: f64,
    coherence: [Vec<f64>; 2],
}

fn decompose(
    spectrum: &PendularSpectrum,
    coeffs: &SwitchOnCoefficients,
    s: &DMatrix<f64>,
    n_max: usize,
    tau_grid: &[f64],
) -> Decomposition {
    let c = &coeffs.values;
    let population = (0..spectrum.n_states()).map(|n| c[n].norm_sqr() * s[(n, n)]).sum();
    let mut coherence = [vec![0.0; tau_grid.len()], vec![0.0; tau_grid.len()]];
    for n in 0..n_max {
        for m in 0..n {
            let label = spectrum.states[n].label;
            if label != spectrum.states[m].label || s[(n, m)] == 0.0 {
                continue;
            }
            let amp = c[n].conj() * c[m] * s[(n, m)];
            let de = spectrum.states[n].energy - spectrum.states[m].energy;
            let slot = &mut coherence[(label == SymmetryLabel::A2) as usize];
            for (k, &tau) in tau_grid.iter().enumerate() {
                slot[k] += 2.0 * (amp * Complex64::from_polar(1.0, de * tau)).re;
            }
        }
    }
    Decomposition { population, coherence }
}

pub fn switch_on_evolution(
    spectrum: &PendularSpectrum,
    coeffs: &SwitchOnCoefficients,
    tau_grid: &[f64],
) -> Result<SwitchOnSeries> {
    check_matching(spectrum, coeffs)?;
    let n_max = coeffs.n_max();
    let params = spectrum.params;
    let cos_m = element_matrix(spectrum, Operator::Cos);
    let cos2_m = element_matrix(spectrum, Operator::Cos2);
    let cos_d = decompose(spectrum, coeffs, &cos_m, n_max, tau_grid);
    let cos2_d = decompose(spectrum, coeffs, &cos2_m, n_max, tau_grid);
    let energy: f64 = spectrum
        .states
        .iter()
        .zip(&coeffs.values)
        .map(|(s, c)| c.norm_sqr() * s.energy)
        .sum();
    let cos: Vec<f64> = (0..tau_grid.len())
        .map(|k| cos_d.population + cos_d.coherence[0][k] + cos_d.coherence[1][k])
        .collect();
    let cos2: Vec<f64> = (0..tau_grid.len())
        .map(|k| cos2_d.population + cos2_d.coherence[0][k] + cos2_d.coherence[1][k])
        .collect();
    // H = J² − η cos θ − ζ cos² θ
    let j2 = cos.iter().zip(&cos2).map(|(c, c2)| energy + params.eta() * c + params.zeta() * c2).collect();
    let series = |observable, values| ExpectationSeries { observable, tau_grid: tau_grid.to_vec(), values };
    let [a1, a2] = cos_d.coherence;
    let out = SwitchOnSeries {
        cos: series(Observable::Cos, cos),
        cos2: series(Observable::Cos2, cos2),
        j2: series(Observable::J2, j2),
        energy: series(Observable::Energy, vec![energy; tau_grid.len()]),
        cos_population: cos_d.population,
        cos_coherence_a1: a1,
        cos_coherence_a2: a2,
        n_max,
    };
    out.cos.check_bounds()?;
    out.cos2.check_bounds()?;
    out.j2.check_bounds()?;
    Ok(out)
}

/// ⟨cos θ⟩_p: the time-independent part of the switch-on orientation.
pub fn orientation_population_term(spectrum: &PendularSpectrum, coeffs: &SwitchOnCoefficients) -> Result<f64> {
    check_matching(spectrum, coeffs)?;
    let m = element_matrix(spectrum, Operator::Cos);
    Ok(coeffs.values.iter().enumerate().map(|(n, c)| c.norm_sqr() * m[(n, n)]).sum())
}

/// (1/τ̃) ∫_0^τ̃ e^{iΔτ} dτ.
fn mean_phase(delta: f64, tau_tilde: f64) -> Complex64 {
    let x = delta * tau_tilde;
    if x.abs() < 1e-8 {
        return Complex64::new(1.0, 0.5 * x);
    }
    (Complex64::from_polar(1.0, x) - 1.0) / Complex64::new(0.0, x)
}

fn time_average_with(spectrum: &PendularSpectrum, coeffs: &SwitchOnCoefficients, m: &DMatrix<f64>, tau_tilde: f64) -> f64 {
    let c = &coeffs.values;
    let n_max = coeffs.n_max();
    let mut total: f64 = c.iter().enumerate().map(|(n, x)| x.norm_sqr() * m[(n, n)]).sum();
    for n in 0..n_max {
        for k in 0..n {
            if m[(n, k)] == 0.0 {
                continue;
            }
            let de = spectrum.states[n].energy - spectrum.states[k].energy;
            total += 2.0 * (c[n].conj() * c[k] * m[(n, k)] * mean_phase(de, tau_tilde)).re;
        }
    }
    total
}

/// (1/τ̃) ∫_0^τ̃ ⟨cos θ⟩(τ) dτ in closed form.
pub fn time_averaged_orientation(spectrum: &PendularSpectrum, coeffs: &SwitchOnCoefficients, tau_tilde: f64) -> Result<f64> {
    if !(tau_tilde > 0.0) {
        return Err(PendulumError::InvalidParameter(format!("tau_tilde must be > 0 (got {tau_tilde})")));
    }
    check_matching(spectrum, coeffs)?;
    Ok(time_average_with(spectrum, coeffs, &element_matrix(spectrum, Operator::Cos), tau_tilde))
}

/// One coherence term between two populated states of the same symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceTerm {
    pub n: usize,
    pub n_prime: usize,
    pub gamma: SymmetryLabel,
    pub gap: f64,
    pub period: f64,
    /// |C_n C_n' ⟨n|cos θ|n'⟩|.
    pub amplitude: f64,
}

/// Same-symmetry pairs with both populations above `threshold`, longest
/// period first.
pub fn coherence_terms(spectrum: &PendularSpectrum, coeffs: &SwitchOnCoefficients, threshold: f64) -> Result<Vec<CoherenceTerm>> {
    check_matching(spectrum, coeffs)?;
    let m = element_matrix(spectrum, Operator::Cos);
    let c = &coeffs.values;
    let populated: Vec<usize> = (0..c.len()).filter(|&n| c[n].norm_sqr() > threshold).collect();
    let mut out = Vec::new();
    for (i, &n) in populated.iter().enumerate() {
        for &k in &populated[..i] {
            let gamma = spectrum.states[n].label;
            if gamma != spectrum.states[k].label {
                continue;
            }
            let gap = (spectrum.states[n].energy - spectrum.states[k].energy).abs();
            out.push(CoherenceTerm {
                n: k,
                n_prime: n,
                gamma,
                gap,
                period: if gap > 0.0 { TAU / gap } else { f64::INFINITY },
                amplitude: (c[n] * c[k]).norm() * m[(n, k)].abs(),
            });
        }
    }
    out.sort_by(|a, b| b.period.total_cmp(&a.period));
    Ok(out)
}

/// Period 2π/Δε of the smallest populated same-symmetry gap.
pub fn dominant_coherence_period(spectrum: &PendularSpectrum, coeffs: &SwitchOnCoefficients) -> Result<Option<CoherenceTerm>> {
    Ok(coherence_terms(spectrum, coeffs, POPULATED_THRESHOLD)?.into_iter().next())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopologyMapConfig {
    pub eta_range: (f64, f64),
    pub zeta_range: (f64, f64),
    pub n_eta: usize,
    pub n_zeta: usize,
    pub j0: i64,
    pub tau_tilde: f64,
    pub j_max: usize,
}

impl Default for TopologyMapConfig {
    fn default() -> Self {
        Self {
            eta_range: (-35.0, 0.0),
            zeta_range: (5.0, 40.0),
            n_eta: 64,
            n_zeta: 64,
            j0: 1,
            tau_tilde: 4.0 * PI,
            j_max: 40,
        }
    }
}

/// η = −κ√ζ sampled at the map's ζ values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocusCurve {
    pub kappa: u32,
    /// Odd κ: genuine crossings. Even κ: avoided ones.
    pub genuine: bool,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapOverlays {
    pub loci: Vec<LocusCurve>,
    /// |η| = 2ζ, separating single and double wells.
    pub well_boundary: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyMap {
    pub config: TopologyMapConfig,
    pub etas: Vec<f64>,
    pub zetas: Vec<f64>,
    /// Row-major, one row per ζ.
    pub values: Vec<f64>,
    pub overlays: MapOverlays,
}

impl TopologyMap {
    pub fn at(&self, i_zeta: usize, i_eta: usize) -> f64 {
        self.values[i_zeta * self.etas.len() + i_eta]
    }

    pub fn row(&self, i_zeta: usize) -> &[f64] {
        let n = self.etas.len();
        &self.values[i_zeta * n..(i_zeta + 1) * n]
    }

    /// |∂F/∂η| along one row: central differences inside, one-sided at the ends.
    pub fn eta_derivative(&self, i_zeta: usize) -> Vec<f64> {
        let row = self.row(i_zeta);
        let x = &self.etas;
        let n = row.len();
        (0..n)
            .map(|j| {
                let (a, b) = if j == 0 {
                    (0, 1)
                } else if j == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (j - 1, j + 1)
                };
                ((row[b] - row[a]) / (x[b] - x[a])).abs()
            })
            .collect()
    }
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64).collect()
}

fn map_point(eta: f64, zeta: f64, config: &TopologyMapConfig) -> Result<f64> {
    let spectrum = solve_full_spectrum(&InteractionParams::new(eta, zeta)?, config.j_max)?;
    let coeffs = SwitchOnCoefficients::from_spectrum(&spectrum, config.j0)?;
    time_averaged_orientation(&spectrum, &coeffs, config.tau_tilde)
}

/// Time-averaged orientation over the (η, ζ) plane, parallel over rows.
pub fn topology_map(config: &TopologyMapConfig) -> Result<TopologyMap> {
    if config.n_eta < 16 || config.n_zeta < 16 {
        return Err(PendulumError::InvalidParameter(format!(
            "map resolution must be >= 16 per axis (got {}x{})",
            config.n_eta, config.n_zeta
        )));
    }
    if !(config.eta_range.0 < config.eta_range.1) || !(config.zeta_range.0 < config.zeta_range.1) {
        return Err(PendulumError::InvalidParameter("map ranges must be increasing".into()));
    }
    let etas = linspace(config.eta_range, config.n_eta);
    let zetas = linspace(config.zeta_range, config.n_zeta);
    let rows = zetas
        .par_iter()
        .map(|&zeta| etas.iter().map(|&eta| map_point(eta, zeta, config)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let overlays = map_overlays(&etas, &zetas);
    Ok(TopologyMap { config: *config, etas, zetas, values: rows.concat(), overlays })
}

fn map_overlays(etas: &[f64], zetas: &[f64]) -> MapOverlays {
    let eta_min = etas.iter().copied().fold(f64::INFINITY, f64::min);
    let mut loci = Vec::new();
    for kappa in 1u32.. {
        let points: Vec<(f64, f64)> = zetas
            .iter()
            .map(|&z| (-(kappa as f64) * z.sqrt(), z))
            .filter(|&(e, _)| e >= eta_min)
            .collect();
        if points.is_empty() {
            break;
        }
        loci.push(LocusCurve { kappa, genuine: kappa % 2 == 1, points });
    }
    let well_boundary = zetas.iter().map(|&z| (-2.0 * z, z)).filter(|&(e, _)| e >= eta_min).collect();
    MapOverlays { loci, well_boundary }
}

/// How the η-derivative of the map lines up with the integer-κ loci.
///
/// Only loci inside the map and inside the double-well region (κ√ζ < 2ζ)
/// are counted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocusAlignment {
    pub even_loci: usize,
    /// Even loci with a local maximum of |∂F/∂η| within one cell.
    pub even_hits: usize,
    pub odd_loci: usize,
    /// Mean over loci of the largest |∂F/∂η| within one cell.
    pub even_mean_peak: f64,
    pub odd_mean_peak: f64,
}

impl LocusAlignment {
    pub fn hit_fraction(&self) -> f64 {
        self.even_hits as f64 / self.even_loci.max(1) as f64
    }

    pub fn odd_to_even_ratio(&self) -> f64 {
        self.odd_mean_peak / self.even_mean_peak
    }
}

pub fn locus_alignment(map: &TopologyMap) -> LocusAlignment {
    let (mut even_loci, mut even_hits, mut odd_loci) = (0, 0, 0);
    let (mut even_sum, mut odd_sum) = (0.0, 0.0);
    let n = map.etas.len();
    let (eta_lo, eta_hi) = (map.etas[0], map.etas[n - 1]);
    let step = (eta_hi - eta_lo) / (n - 1) as f64;
    for (i, &zeta) in map.zetas.iter().enumerate() {
        let d = map.eta_derivative(i);
        for kappa in 1u32.. {
            let eta = -(kappa as f64) * zeta.sqrt();
            if eta < eta_lo {
                break;
            }
            if -eta >= 2.0 * zeta {
                continue;
            }
            let centre = ((eta - eta_lo) / step).round() as usize;
            let window = centre.saturating_sub(1)..=(centre + 1).min(n - 1);
            let peak = window.clone().map(|j| d[j]).fold(0.0, f64::max);
            if kappa % 2 == 0 {
                even_loci += 1;
                even_sum += peak;
                let is_max = |j: usize| j > 0 && j + 1 < n && d[j] >= d[j - 1] && d[j] >= d[j + 1];
                if window.into_iter().any(is_max) {
                    even_hits += 1;
                }
            } else {
                odd_loci += 1;
                odd_sum += peak;
            }
        }
    }
    LocusAlignment {
        even_loci,
        even_hits,
        odd_loci,
        even_mean_peak: even_sum / even_loci.max(1) as f64,
        odd_mean_peak: odd_sum / odd_loci.max(1) as f64,
    }
}
