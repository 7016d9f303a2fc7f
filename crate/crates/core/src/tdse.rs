//! Time-dependent propagation by Strang split-operator FFT stepping.
//!
//! One step of length dτ is
//! e^{−iV dτ/2} · IFFT · e^{−iJ² dτ} · FFT · e^{−iV dτ/2}
//! with V sampled at the middle of the step. The norm is never rescaled.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PendulumError, Result};
use crate::fourier::FftPair;
use crate::rotor::{AngularGrid, InteractionParams, Wavefunction};
use crate::spectrum::PendularSpectrum;
use crate::sudden::{ExpectationSeries, Observable};

/// Default time step.
pub const DEFAULT_DTAU: f64 = 1e-3;

/// dτ·ε_max above this triggers a warning.
pub const STABILITY_GUARD: f64 = 0.1;

/// Below this the Richardson differences are treated as round-off.
pub const EXACT_REGIME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    Linear { from: f64, to: f64 },
    /// from + (to − from)·(1 − cos πs)/2.
    SmoothCosine { from: f64, to: f64 },
}

impl Profile {
    /// Value at fractional position s ∈ [0, 1] within the segment.
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Profile::Constant { value } => value,
            Profile::Linear { from, to } => from + (to - from) * s,
            Profile::SmoothCosine { from, to } => from + (to - from) * 0.5 * (1.0 - (PI * s).cos()),
        }
    }

    fn endpoints(&self) -> (f64, f64) {
        (self.eval(0.0), self.eval(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub eta: Profile,
    pub zeta: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct PulseSchedule {
    segments: Vec<Segment>,
}

impl TryFrom<Vec<Segment>> for PulseSchedule {
    type Error = PendulumError;

    fn try_from(segments: Vec<Segment>) -> Result<Self> {
        PulseSchedule::new(segments)
    }
}

impl From<PulseSchedule> for Vec<Segment> {
    fn from(s: PulseSchedule) -> Self {
        s.segments
    }
}

impl PulseSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(PendulumError::InvalidParameter("schedule has no segments".into()));
        }
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.duration >= 0.0) || !seg.duration.is_finite() {
                return Err(PendulumError::InvalidParameter(format!(
                    "segment {i}: duration must be finite and >= 0 (got {})",
                    seg.duration
                )));
            }
            // both profiles are monotone, so checking the ends covers the segment
            let (e0, e1) = seg.eta.endpoints();
            let (z0, z1) = seg.zeta.endpoints();
            for (eta, zeta) in [(e0, z0), (e1, z1)] {
                InteractionParams::new(eta, zeta)
                    .map_err(|e| PendulumError::InvalidParameter(format!("segment {i}: {e}")))?;
            }
        }
        Ok(Self { segments })
    }

    /// Constant fields for `duration`.
    pub fn frozen(params: InteractionParams, duration: f64) -> Result<Self> {
        Self::new(vec![Segment {
            duration,
            eta: Profile::Constant { value: params.eta() },
            zeta: Profile::Constant { value: params.zeta() },
        }])
    }

    /// Linear ramp between two parameter points.
    pub fn linear_ramp(from: InteractionParams, to: InteractionParams, duration: f64) -> Result<Self> {
        Self::new(vec![Segment {
            duration,
            eta: Profile::Linear { from: from.eta(), to: to.eta() },
            zeta: Profile::Linear { from: from.zeta(), to: to.zeta() },
        }])
    }

    /// Raised-cosine ramp between two parameter points.
    pub fn smooth_ramp(from: InteractionParams, to: InteractionParams, duration: f64) -> Result<Self> {
        Self::new(vec![Segment {
            duration,
            eta: Profile::SmoothCosine { from: from.eta(), to: to.eta() },
            zeta: Profile::SmoothCosine { from: from.zeta(), to: to.zeta() },
        }])
    }

    /// Append the segments of `other`.
    pub fn then(mut self, other: PulseSchedule) -> Self {
        self.segments.extend(other.segments);
        self
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// (η, ζ) at time τ; right-continuous at segment boundaries and held at
    /// the final value past the end.
    pub fn at(&self, tau: f64) -> (f64, f64) {
        let mut start = 0.0;
        for seg in &self.segments {
            let end = start + seg.duration;
            if tau < end {
                let s = if seg.duration > 0.0 { ((tau - start) / seg.duration).clamp(0.0, 1.0) } else { 0.0 };
                return (seg.eta.eval(s), seg.zeta.eval(s));
            }
            start = end;
        }
        let last = self.segments.last().expect("schedule is never empty");
        (last.eta.eval(1.0), last.zeta.eval(1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub tau_samples: Vec<f64>,
    #[serde(skip)]
    pub states: Vec<Wavefunction>,
    pub cos: ExpectationSeries,
    pub cos2: ExpectationSeries,
    pub j2: ExpectationSeries,
    pub norms: Vec<f64>,
    pub steps: usize,
    pub dtau: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &Wavefunction {
        self.states.last().expect("trajectory always holds the initial state")
    }

    /// max |‖ψ‖ − 1| over the samples.
    pub fn norm_drift(&self) -> f64 {
        self.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }
}

struct Stepper {
    fft: FftPair,
    kinetic: Vec<Complex64>,
    cos: Vec<f64>,
    dt: f64,
}

impl Stepper {
    fn new(grid: &AngularGrid, dt: f64) -> Self {
        let n = grid.n_points();
        let kinetic = (0..n).map(|k| Complex64::from_polar(1.0, -grid.wavenumber(k).powi(2) * dt)).collect();
        let cos = grid.thetas().map(f64::cos).collect();
        Self { fft: FftPair::new(n), kinetic, cos, dt }
    }

    fn step(&mut self, psi: &mut [Complex64], eta: f64, zeta: f64) {
        let half = 0.5 * self.dt;
        let kick = |psi: &mut [Complex64], cos: &[f64]| {
            for (a, c) in psi.iter_mut().zip(cos) {
                let v = -eta * c - zeta * c * c;
                *a *= Complex64::from_polar(1.0, -v * half);
            }
        };
        kick(psi, &self.cos);
        self.fft.forward(psi);
        for (a, k) in psi.iter_mut().zip(&self.kinetic) {
            *a *= k;
        }
        self.fft.inverse(psi);
        kick(psi, &self.cos);
    }
}

/// Propagate over the whole schedule.
pub fn propagate(psi0: &Wavefunction, schedule: &PulseSchedule, dtau: f64, sample_stride: usize) -> Result<Trajectory> {
    propagate_until(psi0, schedule, schedule.total_duration(), dtau, sample_stride)
}

/// Propagate to `tau_end` in ⌈τ_end/dτ⌉ equal steps, keeping every
/// `sample_stride`-th state (plus the first and last).
pub fn propagate_until(
    psi0: &Wavefunction,
    schedule: &PulseSchedule,
    tau_end: f64,
    dtau: f64,
    sample_stride: usize,
) -> Result<Trajectory> {
    if !(dtau > 0.0) || !dtau.is_finite() {
        return Err(PendulumError::InvalidParameter(format!("dtau must be > 0 (got {dtau})")));
    }
    if !(tau_end >= 0.0) || !tau_end.is_finite() {
        return Err(PendulumError::InvalidParameter(format!("tau_end must be >= 0 (got {tau_end})")));
    }
    let stride = sample_stride.max(1);
    let grid = *psi0.grid();
    let steps = if tau_end == 0.0 { 0 } else { (tau_end / dtau - 1e-9).ceil().max(1.0) as usize };
    // land exactly on tau_end
    let dt = if steps == 0 { dtau } else { tau_end / steps as f64 };
    let eps_max = (grid.max_momentum() as f64).powi(2);
    if dt * eps_max > STABILITY_GUARD {
        log::warn!(
            "dtau·eps_max = {:.3} exceeds {STABILITY_GUARD}; accuracy rests on the populated momenta",
            dt * eps_max
        );
    }
    let mut stepper = Stepper::new(&grid, dt);
    let mut psi: Vec<Complex64> = psi0.amplitudes().to_vec();
    let mut tau_samples = Vec::new();
    let mut states = Vec::new();
    let mut record = |tau: f64, amps: &[Complex64]| -> Result<()> {
        tau_samples.push(tau);
        states.push(Wavefunction::from_amplitudes(grid, amps.to_vec())?);
        Ok(())
    };
    record(0.0, &psi)?;
    for s in 0..steps {
        let (eta, zeta) = schedule.at((s as f64 + 0.5) * dt);
        stepper.step(&mut psi, eta, zeta);
        if psi.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(PendulumError::NonFinite { step: s + 1 });
        }
        if (s + 1) % stride == 0 || s + 1 == steps {
            record((s + 1) as f64 * dt, &psi)?;
        }
    }
    let observe = |obs: Observable, f: &dyn Fn(&Wavefunction) -> f64| ExpectationSeries {
        observable: obs,
        tau_grid: tau_samples.clone(),
        values: states.iter().map(f).collect(),
    };
    let cos = observe(Observable::Cos, &|w| w.expect_cos());
    let cos2 = observe(Observable::Cos2, &|w| w.expect_cos2());
    let j2 = observe(Observable::J2, &|w| w.expect_j2());
    let norms = states.iter().map(|w| w.norm()).collect();
    Ok(Trajectory { tau_samples, states, cos, cos2, j2, norms, steps, dtau: dt })
}

/// ⟨φ_n|ψ⟩ for every state of the spectrum.
pub fn pendular_overlaps(psi: &Wavefunction, spectrum: &PendularSpectrum) -> Result<Vec<Complex64>> {
    (0..spectrum.n_states())
        .map(|n| spectrum.wavefunction(n, psi.grid()).map(|phi| phi.inner(psi)))
        .collect()
}

/// |⟨φ_n|ψ⟩|² for every state of the spectrum.
pub fn pendular_populations(psi: &Wavefunction, spectrum: &PendularSpectrum) -> Result<Vec<f64>> {
    Ok(pendular_overlaps(psi, spectrum)?.into_iter().map(|c| c.norm_sqr()).collect())
}

/// Σ_n ⟨φ_n|ψ0⟩ e^{−iε_n τ} φ_n for fixed fields: the exact reference for
/// frozen-field propagation.
pub fn spectral_propagate(psi0: &Wavefunction, spectrum: &PendularSpectrum, tau: f64) -> Result<Wavefunction> {
    let grid = *psi0.grid();
    let mut out = vec![Complex64::default(); grid.n_points()];
    for (n, c) in pendular_overlaps(psi0, spectrum)?.into_iter().enumerate() {
        let phase = c * Complex64::from_polar(1.0, -spectrum.states[n].energy * tau);
        let phi = spectrum.wavefunction(n, &grid)?;
        for (o, p) in out.iter_mut().zip(phi.amplitudes()) {
            *o += phase * p;
        }
    }
    Wavefunction::from_amplitudes(grid, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AccuracyRegime {
    /// Differences at round-off level: the splitting is exact for this case.
    Exact,
    Converging,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub regime: AccuracyRegime,
    /// Richardson estimate log₂(‖ψ_h − ψ_{h/2}‖ / ‖ψ_{h/2} − ψ_{h/4}‖).
    pub order: Option<f64>,
    pub coarse_difference: f64,
    pub fine_difference: f64,
}

/// Observed global order of the scheme from runs at dτ, dτ/2 and dτ/4.
pub fn second_order_accuracy_check(
    psi0: &Wavefunction,
    schedule: &PulseSchedule,
    tau_end: f64,
    dtau: f64,
) -> Result<AccuracyReport> {
    let run = |h: f64| -> Result<Wavefunction> {
        Ok(propagate_until(psi0, schedule, tau_end, h, usize::MAX)?.final_state().clone())
    };
    let (a, b, c) = (run(dtau)?, run(dtau / 2.0)?, run(dtau / 4.0)?);
    let coarse = a.distance(&b);
    let fine = b.distance(&c);
    if coarse < EXACT_REGIME_TOL {
        return Ok(AccuracyReport { regime: AccuracyRegime::Exact, order: None, coarse_difference: coarse, fine_difference: fine });
    }
    Ok(AccuracyReport {
        regime: AccuracyRegime::Converging,
        order: Some((coarse / fine).log2()),
        coarse_difference: coarse,
        fine_difference: fine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::{free_rotor_wavefunction, make_grid, RotorState};
    use crate::spectrum::{solve_full_spectrum, solve_spectrum};

    fn params(eta: f64, zeta: f64) -> InteractionParams {
        InteractionParams::new(eta, zeta).unwrap()
    }

    #[test]
    fn schedule_is_right_continuous() {
        let a = PulseSchedule::linear_ramp(InteractionParams::free(), params(-10.0, 25.0), 1.0).unwrap();
        let s = a.then(PulseSchedule::frozen(params(-2.0, 4.0), 2.0).unwrap());
        assert_eq!(s.at(0.0), (0.0, 0.0));
        assert_eq!(s.at(0.5), (-5.0, 12.5));
        assert_eq!(s.at(1.0), (-2.0, 4.0));
        assert_eq!(s.at(10.0), (-2.0, 4.0));
        assert!((s.total_duration() - 3.0).abs() < 1e-15);
        let smooth = Profile::SmoothCosine { from: 0.0, to: 2.0 };
        assert!((smooth.eval(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn schedule_validation() {
        let bad = Segment { duration: -1.0, eta: Profile::Constant { value: 0.0 }, zeta: Profile::Constant { value: 0.0 } };
        assert!(PulseSchedule::new(vec![bad]).is_err());
        let pos = Segment { duration: 1.0, eta: Profile::Linear { from: 0.0, to: 1.0 }, zeta: Profile::Constant { value: 0.0 } };
        assert!(PulseSchedule::new(vec![pos]).is_err());
        assert!(PulseSchedule::new(vec![]).is_err());
    }

    #[test]
    fn schedule_json_round_trip() {
        let s = PulseSchedule::smooth_ramp(InteractionParams::free(), params(-10.0, 25.0), 3.0).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: PulseSchedule = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
        assert!(serde_json::from_str::<PulseSchedule>("[]").is_err());
    }

    #[test]
    fn free_rotor_phase() {
        let grid = make_grid(256).unwrap();
        let psi0 = free_rotor_wavefunction(RotorState::new(1), &grid).unwrap();
        let sched = PulseSchedule::frozen(InteractionParams::free(), 2.0 * PI).unwrap();
        let traj = propagate(&psi0, &sched, 1e-3, 1000).unwrap();
        let overlap = psi0.inner(traj.final_state());
        // e^{−i·2π} = 1
        assert!((overlap - Complex64::new(1.0, 0.0)).norm() < 1e-8);
        assert!(traj.norm_drift() < 1e-10);
        assert_eq!(traj.steps, 6284);
    }

    #[test]
    fn eigenstate_is_stationary() {
        let p = params(-10.0, 25.0);
        let grid = make_grid(256).unwrap();
        let s = solve_spectrum(&p, 3, 64).unwrap();
        let psi0 = s.wavefunction(0, &grid).unwrap();
        let traj = propagate(&psi0, &PulseSchedule::frozen(p, 2.0 * PI).unwrap(), 1e-3, 1000).unwrap();
        for state in &traj.states {
            let pops = pendular_populations(state, &s).unwrap();
            assert!((pops[0] - 1.0).abs() < 1e-8, "{}", pops[0]);
        }
    }

    #[test]
    fn spectral_reference_is_unitary() {
        let p = params(-4.0, 9.0);
        let grid = make_grid(128).unwrap();
        let s = solve_full_spectrum(&p, 32).unwrap();
        let psi0 = free_rotor_wavefunction(RotorState::new(1), &grid).unwrap();
        let later = spectral_propagate(&psi0, &s, 1.3).unwrap();
        assert!((later.norm() - 1.0).abs() < 1e-12);
        let back = spectral_propagate(&psi0, &s, 0.0).unwrap();
        assert!(back.distance(&psi0) < 1e-12);
    }

    #[test]
    fn accuracy_check_regimes() {
        let grid = make_grid(128).unwrap();
        let psi0 = free_rotor_wavefunction(RotorState::new(2), &grid).unwrap();
        let free = PulseSchedule::frozen(InteractionParams::free(), 1.0).unwrap();
        let r = second_order_accuracy_check(&psi0, &free, 1.0, 1e-2).unwrap();
        assert_eq!(r.regime, AccuracyRegime::Exact);

        let frozen = PulseSchedule::frozen(params(-4.0, 9.0), 1.0).unwrap();
        let r = second_order_accuracy_check(&psi0, &frozen, 1.0, 1e-2).unwrap();
        let order = r.order.unwrap();
        assert!((order - 2.0).abs() < 0.1, "{order}");
    }

    #[test]
    fn nan_aborts_with_step() {
        let grid = make_grid(64).unwrap();
        let mut amps = vec![Complex64::new(0.1, 0.0); 64];
        amps[3] = Complex64::new(f64::NAN, 0.0);
        let psi = Wavefunction::from_amplitudes(grid, amps).unwrap();
        let sched = PulseSchedule::frozen(InteractionParams::free(), 0.1).unwrap();
        assert!(matches!(propagate(&psi, &sched, 1e-2, 1), Err(PendulumError::NonFinite { step: 1 })));
    }
}
