// Sudden switch-off from a pendular state: rotor populations and the
// field-free revivals of ⟨cos θ⟩ and ⟨cos²θ⟩.
use std::f64::consts::PI;

use planar_pendulum::rotor::InteractionParams;
use planar_pendulum::spectrum::solve_spectrum;
use planar_pendulum::sudden::{switch_off_coefficients, switch_off_evolution, tau_grid, PopulationIndex};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = solve_spectrum(&InteractionParams::new(-10.0, 25.0)?, 1, 48)?;
    let c = switch_off_coefficients(&s, 0, 48)?;
    println!("parseval defect {:.1e}", c.parseval_defect());
    for p in c.populations().iter().take(6) {
        if let PopulationIndex::Rotor { j } = p.index {
            println!("|J| = {j}: {:.6}", p.probability);
        }
    }
    let taus = tau_grid(2.0 * PI, 9);
    let series = switch_off_evolution(&c, &taus)?;
    for (k, tau) in taus.iter().enumerate() {
        println!("tau/pi {:5.2}  cos {:+.6}  cos2 {:.6}", tau / PI, series.cos.values[k], series.cos2.values[k]);
    }
    Ok(())
}
