//! Pendular spectrum in the parity-adapted free-rotor basis.
//!
//! The A₁ sector uses {1/√(2π), cos(Jθ)/√π : J = 1..J_max} and the A₂ sector
//! {sin(Jθ)/√π : J = 1..J_max}. Both cos θ and cos² θ are banded in these
//! bases, so the Hamiltonian splits into two small symmetric matrices that
//! are diagonalized independently and merged by energy.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{PendulumError, Result};
use crate::rotor::{AngularGrid, InteractionParams, SymmetryLabel, Wavefunction};

/// Default basis cutoff; converged to ~1e-10 for ζ ≤ 50.
pub const DEFAULT_J_MAX: usize = 64;

/// Gap below which a refined crossing counts as a true degeneracy.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Absolute η tolerance of the golden-section refinement.
pub const CROSSING_ETA_TOL: f64 = 1e-4;

const PARITY_TOL: f64 = 1e-10;

/// Angular momenta spanned by a sector, in basis order.
pub fn sector_momenta(gamma: SymmetryLabel, j_max: usize) -> Vec<usize> {
    match gamma {
        SymmetryLabel::A1 => (0..=j_max).collect(),
        SymmetryLabel::A2 => (1..=j_max).collect(),
    }
}

/// Matrix of cos θ in a parity-adapted sector.
pub fn sector_cos_matrix(gamma: SymmetryLabel, j_max: usize) -> DMatrix<f64> {
    let js = sector_momenta(gamma, j_max);
    let dim = js.len();
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim.saturating_sub(1) {
        let (j, jp) = (js[i], js[i + 1]);
        let mut v = 0.5;
        if j == 0 || jp == 0 {
            v *= std::f64::consts::SQRT_2;
        }
        m[(i, i + 1)] = v;
        m[(i + 1, i)] = v;
    }
    m
}

/// Matrix of cos² θ in a parity-adapted sector.
///
/// cos² θ = ½ + ½ cos 2θ. The cos 2θ part couples |ΔJ| = 2 and, for J = 1,
/// also folds J = −1 back onto the same basis function, giving ½ ± ¼ on
/// that diagonal entry.
pub fn sector_cos2_matrix(gamma: SymmetryLabel, j_max: usize) -> DMatrix<f64> {
    let js = sector_momenta(gamma, j_max);
    let dim = js.len();
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = match (gamma, js[i]) {
            (SymmetryLabel::A1, 1) => 0.75,
            (SymmetryLabel::A2, 1) => 0.25,
            _ => 0.5,
        };
        if i + 2 < dim {
            let mut v = 0.25;
            if js[i] == 0 {
                v *= std::f64::consts::SQRT_2;
            }
            m[(i, i + 2)] = v;
            m[(i + 2, i)] = v;
        }
    }
    m
}

/// Hamiltonian blocks J² − η cos θ − ζ cos² θ for both sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorHamiltonians {
    pub j_max: usize,
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
}

impl SectorHamiltonians {
    pub fn sector(&self, gamma: SymmetryLabel) -> &DMatrix<f64> {
        match gamma {
            SymmetryLabel::A1 => &self.a1,
            SymmetryLabel::A2 => &self.a2,
        }
    }
}

pub fn build_hamiltonian(params: &InteractionParams, j_max: usize) -> Result<SectorHamiltonians> {
    if j_max < 8 {
        return Err(PendulumError::InvalidParameter(format!("J_max must be >= 8 (got {j_max})")));
    }
    let block = |gamma| {
        let js = sector_momenta(gamma, j_max);
        let kinetic = DMatrix::from_diagonal(&DVector::from_iterator(
            js.len(),
            js.iter().map(|&j| (j * j) as f64),
        ));
        kinetic - sector_cos_matrix(gamma, j_max) * params.eta()
            - sector_cos2_matrix(gamma, j_max) * params.zeta()
    };
    Ok(SectorHamiltonians { j_max, a1: block(SymmetryLabel::A1), a2: block(SymmetryLabel::A2) })
}

/// One eigenpair of the pendular Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct PendularState {
    pub energy: f64,
    pub label: SymmetryLabel,
    /// Position of this state within its own symmetry sector.
    pub sector_index: usize,
    /// Coefficients over the sector basis, unit norm, largest entry positive.
    pub coeffs: DVector<f64>,
}

impl PendularState {
    /// Value of the eigenfunction at angle `theta`.
    pub fn eval(&self, theta: f64) -> f64 {
        let inv_sqrt_pi = 1.0 / PI.sqrt();
        match self.label {
            SymmetryLabel::A1 => {
                let mut v = self.coeffs[0] / TAU.sqrt();
                for (j, c) in self.coeffs.iter().enumerate().skip(1) {
                    v += c * (j as f64 * theta).cos() * inv_sqrt_pi;
                }
                v
            }
            SymmetryLabel::A2 => self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * ((i + 1) as f64 * theta).sin() * inv_sqrt_pi)
                .sum(),
        }
    }

    /// Coefficient C_J = ⟨e^{iJθ}/√(2π)|φ⟩ read off the sector basis.
    pub fn rotor_overlap(&self, j: i64) -> Complex64 {
        let aj = j.unsigned_abs() as usize;
        match self.label {
            SymmetryLabel::A1 => {
                if aj == 0 {
                    Complex64::new(self.coeffs[0], 0.0)
                } else if aj < self.coeffs.len() {
                    Complex64::new(self.coeffs[aj] * FRAC_1_SQRT_2, 0.0)
                } else {
                    Complex64::default()
                }
            }
            SymmetryLabel::A2 => {
                if aj == 0 || aj > self.coeffs.len() {
                    Complex64::default()
                } else {
                    // sin(Jθ) = (e^{iJθ} − e^{−iJθ})/(2i)
                    Complex64::new(0.0, -(j.signum() as f64) * self.coeffs[aj - 1] * FRAC_1_SQRT_2)
                }
            }
        }
    }
}

/// Lowest pendular states, sorted by energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PendularSpectrum {
    pub params: InteractionParams,
    pub j_max: usize,
    pub states: Vec<PendularState>,
}

impl PendularSpectrum {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    pub fn labels(&self) -> Vec<SymmetryLabel> {
        self.states.iter().map(|s| s.label).collect()
    }

    pub fn state(&self, n: usize) -> Result<&PendularState> {
        self.states
            .get(n)
            .ok_or(PendulumError::StateIndex { n, available: self.states.len() })
    }

    /// Indices of the states carrying `gamma`, in energy order.
    pub fn sector_indices(&self, gamma: SymmetryLabel) -> Vec<usize> {
        (0..self.states.len()).filter(|&n| self.states[n].label == gamma).collect()
    }

    /// Eigenfunction of state `n` sampled on `grid`.
    pub fn wavefunction(&self, n: usize, grid: &AngularGrid) -> Result<Wavefunction> {
        let state = self.state(n)?;
        if self.j_max as i64 > grid.max_momentum() {
            return Err(PendulumError::Aliasing {
                n_points: grid.n_points(),
                j: self.j_max as i64,
                limit: grid.max_momentum(),
            });
        }
        let amplitudes = grid.thetas().map(|t| Complex64::new(state.eval(t), 0.0)).collect();
        Wavefunction::from_amplitudes(*grid, amplitudes)
    }

    /// Gap to the nearest neighbour in the merged spectrum.
    pub fn neighbour_gap(&self, n: usize) -> f64 {
        let e = self.states[n].energy;
        let below = n.checked_sub(1).map(|m| e - self.states[m].energy);
        let above = self.states.get(n + 1).map(|s| s.energy - e);
        match (below, above) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => f64::INFINITY,
        }
    }
}

fn diagonalize(matrix: DMatrix<f64>) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let dim = matrix.nrows();
    let mat = faer::Mat::<f64>::from_fn(dim, dim, |i, j| matrix[(i, j)]);
    // eigenvalues come back in ascending order
    let eig = mat.selfadjoint_eigendecomposition(faer::Side::Lower);
    let (u, s) = (eig.u(), eig.s().column_vector());
    let mut values = Vec::with_capacity(dim);
    let mut vectors = Vec::with_capacity(dim);
    for i in 0..dim {
        let value = s.read(i);
        if !value.is_finite() {
            return Err(PendulumError::Eigensolver(format!("non-finite eigenvalue {value} in a {dim}x{dim} block")));
        }
        let mut v = DVector::from_fn(dim, |k, _| u.read(k, i));
        let pivot = v.iamax();
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        values.push(value);
        vectors.push(v);
    }
    Ok((values, vectors))
}

fn solve_states(params: &InteractionParams, j_max: usize) -> Result<Vec<PendularState>> {
    let blocks = build_hamiltonian(params, j_max)?;
    let mut states = Vec::with_capacity(2 * j_max + 1);
    for (gamma, block) in [(SymmetryLabel::A1, blocks.a1), (SymmetryLabel::A2, blocks.a2)] {
        let (values, vectors) = diagonalize(block)?;
        for (sector_index, (energy, coeffs)) in values.into_iter().zip(vectors).enumerate() {
            states.push(PendularState { energy, label: gamma, sector_index, coeffs });
        }
    }
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.label.cmp(&b.label)));
    Ok(states)
}

/// Lowest `n_states` eigenpairs of the merged A₁/A₂ problem.
pub fn solve_spectrum(params: &InteractionParams, n_states: usize, j_max: usize) -> Result<PendularSpectrum> {
    if n_states > 2 * j_max {
        return Err(PendulumError::InvalidParameter(format!(
            "n_states = {n_states} exceeds 2 J_max = {}",
            2 * j_max
        )));
    }
    let mut states = solve_states(params, j_max)?;
    states.truncate(n_states);
    Ok(PendularSpectrum { params: *params, j_max, states })
}

/// Every eigenpair the basis supports (2 J_max + 1 states).
pub fn solve_full_spectrum(params: &InteractionParams, j_max: usize) -> Result<PendularSpectrum> {
    Ok(PendularSpectrum { params: *params, j_max, states: solve_states(params, j_max)? })
}

/// Parity label of a grid wavefunction.
///
/// Fails when both the even and the odd part carry weight, which means the
/// state was built from a contaminated basis.
pub fn classify_symmetry(psi: &Wavefunction) -> Result<SymmetryLabel> {
    let norm = psi.norm();
    let (even, odd) = psi.parity_norms();
    if odd <= PARITY_TOL * norm {
        Ok(SymmetryLabel::A1)
    } else if even <= PARITY_TOL * norm {
        Ok(SymmetryLabel::A2)
    } else {
        Err(PendulumError::MixedParity { even, odd })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingKind {
    Genuine,
    Avoided,
}

impl std::fmt::Display for CrossingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CrossingKind::Genuine => write!(f, "genuine"),
            CrossingKind::Avoided => write!(f, "avoided"),
        }
    }
}

/// A refined minimum of ε_{n+1} − ε_n along an η scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingRecord {
    pub lower: usize,
    pub upper: usize,
    pub eta_at_crossing: f64,
    pub zeta: f64,
    /// Nearest integer to |η|/√ζ at the crossing.
    pub kappa: u32,
    pub kind: CrossingKind,
    pub min_gap: f64,
}

struct PairProbe {
    gap: f64,
    lower: (SymmetryLabel, usize, f64),
    upper: (SymmetryLabel, usize, f64),
}

fn probe_pair(eta: f64, zeta: f64, lower: usize, j_max: usize) -> Result<PairProbe> {
    let params = InteractionParams::new(eta.min(0.0), zeta)?;
    let spec = solve_spectrum(&params, lower + 2, j_max)?;
    let a = &spec.states[lower];
    let b = &spec.states[lower + 1];
    Ok(PairProbe {
        gap: b.energy - a.energy,
        lower: (a.label, a.sector_index, a.energy),
        upper: (b.label, b.sector_index, b.energy),
    })
}

/// Energy of the `index`-th state of one sector; smooth through crossings
/// with the other sector.
fn sector_branch(eta: f64, zeta: f64, gamma: SymmetryLabel, index: usize, j_max: usize) -> Result<f64> {
    let params = InteractionParams::new(eta.min(0.0), zeta)?;
    let blocks = build_hamiltonian(&params, j_max)?;
    let (values, _) = diagonalize(blocks.sector(gamma).clone())?;
    Ok(values[index])
}

fn golden_section<F: FnMut(f64) -> Result<f64>>(mut lo: f64, mut hi: f64, tol: f64, mut f: F) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection on a sign change of `f` in [lo, hi].
fn bisect<F: FnMut(f64) -> Result<f64>>(mut lo: f64, mut hi: f64, mut f: F) -> Result<Option<f64>> {
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(Some(lo));
    }
    if f_hi == 0.0 {
        return Ok(Some(hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(Some(mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Locate and classify the minima of ε_{lower+1}(η) − ε_lower(η) at fixed ζ.
///
/// The scan samples `resolution` points on `eta_range`, refines each
/// interior minimum by golden section, and classifies it by the symmetry
/// labels of the two states. Pairs of different symmetry are additionally
/// refined by bisection on the difference of the two smooth sector
/// branches, so genuine crossings resolve to eigensolver precision.
pub fn crossing_scan(
    zeta: f64,
    eta_range: (f64, f64),
    lower: usize,
    resolution: usize,
    j_max: usize,
) -> Result<Vec<CrossingRecord>> {
    let (a, b) = eta_range;
    if resolution < 3 {
        return Err(PendulumError::InvalidParameter("crossing scan needs at least 3 points".into()));
    }
    if a > 0.0 || b > 0.0 {
        return Err(PendulumError::InvalidParameter(format!("eta range ({a}, {b}) must be <= 0")));
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let step = (hi - lo) / (resolution - 1) as f64;
    let etas: Vec<f64> = (0..resolution).map(|i| lo + step * i as f64).collect();
    let gaps = etas
        .iter()
        .map(|&eta| probe_pair(eta, zeta, lower, j_max).map(|p| p.gap))
        .collect::<Result<Vec<f64>>>()?;

    let mut records = Vec::new();
    for i in 1..resolution - 1 {
        if !(gaps[i] <= gaps[i - 1] && gaps[i] < gaps[i + 1]) {
            continue;
        }
        let (left, right) = (etas[i - 1], etas[i + 1]);
        let eta_min = golden_section(left, right, CROSSING_ETA_TOL, |eta| {
            probe_pair(eta, zeta, lower, j_max).map(|p| p.gap)
        })?;
        let at_min = probe_pair(eta_min, zeta, lower, j_max)?;
        let mut eta_cross = eta_min;
        let mut min_gap = at_min.gap;
        let kind = if at_min.lower.0 != at_min.upper.0 {
            let (ga, ia, _) = at_min.lower;
            let (gb, ib, _) = at_min.upper;
            let branch_diff = |eta: f64| -> Result<f64> {
                Ok(sector_branch(eta, zeta, ga, ia, j_max)? - sector_branch(eta, zeta, gb, ib, j_max)?)
            };
            if let Some(root) = bisect(left, right, branch_diff)? {
                let probe = probe_pair(root, zeta, lower, j_max)?;
                eta_cross = root;
                min_gap = probe.gap;
            }
            CrossingKind::Genuine
        } else {
            CrossingKind::Avoided
        };
        let kappa = if zeta > 0.0 { (eta_cross.abs() / zeta.sqrt()).round() as u32 } else { 0 };
        records.push(CrossingRecord {
            lower,
            upper: lower + 1,
            eta_at_crossing: eta_cross,
            zeta,
            kappa,
            kind,
            min_gap: min_gap.max(0.0),
        });
    }
    Ok(records)
}

/// Minima of the gap along ζ at fixed η (used to confirm that pure
/// interactions show no crossings).
pub fn crossing_scan_zeta(
    eta: f64,
    zeta_range: (f64, f64),
    lower: usize,
    resolution: usize,
    j_max: usize,
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = (zeta_range.0.min(zeta_range.1), zeta_range.0.max(zeta_range.1));
    let step = (hi - lo) / (resolution.max(3) - 1) as f64;
    let zetas: Vec<f64> = (0..resolution.max(3)).map(|i| lo + step * i as f64).collect();
    let gaps = zetas
        .iter()
        .map(|&z| probe_pair(eta, z, lower, j_max).map(|p| p.gap))
        .collect::<Result<Vec<f64>>>()?;
    Ok((1..zetas.len() - 1)
        .filter(|&i| gaps[i] <= gaps[i - 1] && gaps[i] < gaps[i + 1])
        .map(|i| (zetas[i], gaps[i]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::make_grid;
    use approx::assert_abs_diff_eq;

    fn params(eta: f64, zeta: f64) -> InteractionParams {
        InteractionParams::new(eta, zeta).unwrap()
    }

    /// Quadrature oracle for sector matrix elements.
    fn quadrature_element(gamma: SymmetryLabel, j: usize, jp: usize, f: impl Fn(f64) -> f64) -> f64 {
        let basis = |j: usize, t: f64| match gamma {
            SymmetryLabel::A1 if j == 0 => 1.0 / TAU.sqrt(),
            SymmetryLabel::A1 => (j as f64 * t).cos() / PI.sqrt(),
            SymmetryLabel::A2 => (j as f64 * t).sin() / PI.sqrt(),
        };
        make_grid(512).unwrap().integrate(|t| basis(j, t) * f(t) * basis(jp, t))
    }

    #[test]
    fn sector_matrices_match_quadrature() {
        for gamma in [SymmetryLabel::A1, SymmetryLabel::A2] {
            let js = sector_momenta(gamma, 12);
            let c = sector_cos_matrix(gamma, 12);
            let c2 = sector_cos2_matrix(gamma, 12);
            for (a, &j) in js.iter().enumerate() {
                for (b, &jp) in js.iter().enumerate() {
                    assert_abs_diff_eq!(c[(a, b)], quadrature_element(gamma, j, jp, f64::cos), epsilon = 1e-13);
                    assert_abs_diff_eq!(
                        c2[(a, b)],
                        quadrature_element(gamma, j, jp, |t| t.cos().powi(2)),
                        epsilon = 1e-13
                    );
                }
            }
        }
    }

    #[test]
    fn free_rotor_blocks_are_diagonal() {
        let h = build_hamiltonian(&InteractionParams::free(), 10).unwrap();
        for gamma in [SymmetryLabel::A1, SymmetryLabel::A2] {
            let m = h.sector(gamma);
            let js = sector_momenta(gamma, 10);
            for a in 0..m.nrows() {
                for b in 0..m.ncols() {
                    let expected = if a == b { (js[a] * js[a]) as f64 } else { 0.0 };
                    assert_eq!(m[(a, b)], expected);
                }
            }
        }
        assert!(build_hamiltonian(&InteractionParams::free(), 7).is_err());
    }

    #[test]
    fn orienting_coupling_sign() {
        let h = build_hamiltonian(&params(-5.0, 0.0), 10).unwrap();
        // basis index = J in the A1 sector
        assert_abs_diff_eq!(h.a1[(1, 2)], 2.5);
        assert_abs_diff_eq!(h.a1[(0, 1)], 2.5 * std::f64::consts::SQRT_2);
    }

    #[test]
    fn aligning_shift_of_diagonal() {
        let j_max = 12;
        let bare = build_hamiltonian(&params(-3.0, 0.0), j_max).unwrap();
        let dressed = build_hamiltonian(&params(-3.0, 8.0), j_max).unwrap();
        for gamma in [SymmetryLabel::A1, SymmetryLabel::A2] {
            let js = sector_momenta(gamma, j_max);
            for (i, &j) in js.iter().enumerate() {
                let shift = dressed.sector(gamma)[(i, i)] - bare.sector(gamma)[(i, i)];
                let oracle = -8.0 * quadrature_element(gamma, j, j, |t| t.cos().powi(2));
                assert_abs_diff_eq!(shift, oracle, epsilon = 1e-12);
                if j != 1 {
                    assert_abs_diff_eq!(shift, -4.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn free_rotor_spectrum() {
        let s = solve_spectrum(&InteractionParams::free(), 5, 16).unwrap();
        let e = s.energies();
        for (a, b) in e.iter().zip([0.0, 1.0, 1.0, 4.0, 4.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert!(solve_spectrum(&InteractionParams::free(), 33, 16).is_err());
    }

    #[test]
    fn genuine_degeneracy_at_odd_kappa() {
        let s = solve_spectrum(&params(-5.0, 25.0), 4, 64).unwrap();
        assert!((s.states[2].energy - s.states[1].energy).abs() < 1e-6);
        assert_ne!(s.states[1].label, s.states[2].label);
        assert_abs_diff_eq!(s.states[0].energy, -25.0, epsilon = 1e-10);
    }

    #[test]
    fn avoided_gap_at_even_kappa() {
        let s = solve_spectrum(&params(-10.0, 25.0), 5, 64).unwrap();
        assert_eq!(s.states[2].label, SymmetryLabel::A1);
        assert_eq!(s.states[3].label, SymmetryLabel::A1);
        assert!(s.states[3].energy - s.states[2].energy > 1e-3);
    }

    #[test]
    fn eigenvectors_orthonormal_and_rayleigh_consistent() {
        let p = params(-7.0, 25.0);
        let s = solve_spectrum(&p, 12, 64).unwrap();
        let h = build_hamiltonian(&p, 64).unwrap();
        for (n, st) in s.states.iter().enumerate() {
            assert_abs_diff_eq!(st.coeffs.norm(), 1.0, epsilon = 1e-12);
            let m = h.sector(st.label);
            let rq = st.coeffs.dot(&(m * &st.coeffs));
            assert_abs_diff_eq!(rq, st.energy, epsilon = 1e-10);
            for other in &s.states[n + 1..] {
                if other.label == st.label {
                    assert!(st.coeffs.dot(&other.coeffs).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn rotor_overlap_matches_quadrature() {
        let s = solve_spectrum(&params(-7.0, 25.0), 6, 64).unwrap();
        let g = make_grid(512).unwrap();
        for n in 0..6 {
            let psi = s.wavefunction(n, &g).unwrap();
            for j in -5i64..=5 {
                let rotor = crate::rotor::free_rotor_wavefunction(crate::rotor::RotorState::new(j), &g).unwrap();
                let q = rotor.inner(&psi);
                assert!((q - s.states[n].rotor_overlap(j)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetry_classification() {
        let g = make_grid(512).unwrap();
        let s = solve_spectrum(&params(-12.0, 30.0), 8, 64).unwrap();
        for n in 0..8 {
            let psi = s.wavefunction(n, &g).unwrap();
            assert_eq!(classify_symmetry(&psi).unwrap(), s.states[n].label);
        }
        assert_eq!(s.states[0].label, SymmetryLabel::A1);
        let sin = Wavefunction::from_fn(g, |t| Complex64::new(t.sin(), 0.0)).unwrap();
        assert_eq!(classify_symmetry(&sin).unwrap(), SymmetryLabel::A2);
        let mixed = Wavefunction::from_fn(g, |t| Complex64::new(t.sin() + t.cos(), 0.0)).unwrap();
        assert!(matches!(classify_symmetry(&mixed), Err(PendulumError::MixedParity { .. })));
    }

    #[test]
    fn crossing_scan_examples() {
        let genuine = crossing_scan(25.0, (-8.0, -2.0), 1, 25, 48).unwrap();
        assert_eq!(genuine.len(), 1);
        assert_eq!(genuine[0].kind, CrossingKind::Genuine);
        assert!((genuine[0].eta_at_crossing + 5.0).abs() < 0.01);
        assert!(genuine[0].min_gap < DEGENERACY_TOL);

        let avoided = crossing_scan(25.0, (-13.0, -7.0), 2, 25, 48).unwrap();
        assert_eq!(avoided.len(), 1);
        assert_eq!(avoided[0].kind, CrossingKind::Avoided);
        assert!((avoided[0].eta_at_crossing + 10.0).abs() < 0.05);
        assert!(avoided[0].min_gap > DEGENERACY_TOL);
        assert_eq!(avoided[0].kappa, 2);
    }

    #[test]
    fn pure_aligning_scan_has_no_crossings() {
        for lower in 0..4 {
            assert!(crossing_scan_zeta(0.0, (0.5, 40.0), lower, 40, 48).unwrap().is_empty());
        }
    }

    #[test]
    fn tunnelling_splitting_grows_with_n() {
        let s = solve_spectrum(&params(0.0, 25.0), 6, 64).unwrap();
        let e = s.energies();
        assert!(e[1] - e[0] < e[3] - e[2]);
        assert!(e[3] - e[2] < e[5] - e[4]);
    }

    #[test]
    fn full_spectrum_has_every_state() {
        let s = solve_full_spectrum(&params(-1.0, 2.0), 10).unwrap();
        assert_eq!(s.n_states(), 21);
    }
}
