// Split-operator propagation: frozen field against the spectral answer,
// observed order, and a slow ramp that follows the ground state.
use std::f64::consts::PI;

use planar_pendulum::rotor::{free_rotor_wavefunction, make_grid, InteractionParams, RotorState};
use planar_pendulum::spectrum::{solve_full_spectrum, solve_spectrum};
use planar_pendulum::tdse::{pendular_populations, propagate, second_order_accuracy_check, spectral_propagate, PulseSchedule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = make_grid(256)?;
    let p = InteractionParams::new(-10.0, 25.0)?;
    let psi0 = free_rotor_wavefunction(RotorState::new(1), &grid)?;

    let frozen = PulseSchedule::frozen(p, 1.0)?;
    let traj = propagate(&psi0, &frozen, 1e-3, 250)?;
    let exact = spectral_propagate(&psi0, &solve_full_spectrum(&p, 48)?, 1.0)?;
    println!("frozen field: L2 error {:.2e}, norm drift {:.1e}", traj.final_state().distance(&exact), traj.norm_drift());
    let report = second_order_accuracy_check(&psi0, &frozen, 1.0, 4e-3)?;
    println!("observed order {:?}", report.order);

    let ground = solve_spectrum(&InteractionParams::free(), 1, 48)?.wavefunction(0, &grid)?;
    let ramp = PulseSchedule::smooth_ramp(InteractionParams::free(), p, 20.0 * PI)?;
    let traj = propagate(&ground, &ramp, 1e-2, usize::MAX)?;
    let pops = pendular_populations(traj.final_state(), &solve_spectrum(&p, 3, 48)?)?;
    println!("after a smooth ramp: ground-state population {:.6}", pops[0]);
    Ok(())
}
