// Sudden switch-on from a rotor state: pendular populations, beats and the
// time-averaged orientation.
use std::f64::consts::PI;

use planar_pendulum::rotor::InteractionParams;
use planar_pendulum::spectrum::solve_full_spectrum;
use planar_pendulum::sudden::{
    dominant_coherence_period, switch_on_evolution, tau_grid, time_averaged_orientation, SwitchOnCoefficients,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = solve_full_spectrum(&InteractionParams::new(-10.0, 25.0)?, 48)?;
    let c = SwitchOnCoefficients::from_spectrum(&s, 1)?;
    for (n, v) in c.values().iter().enumerate().take(6) {
        println!("n {n} ({}): {:.6}", c.labels()[n], v.norm_sqr());
    }
    let series = switch_on_evolution(&s, &c, &tau_grid(4.0 * PI, 5))?;
    println!("energy {:.10} (conserved), population part of cos {:+.6}", series.energy.values[0], series.cos_population);
    if let Some(t) = dominant_coherence_period(&s, &c)? {
        println!("slowest beat: states {} and {}, period {:.3} pi", t.n, t.n_prime, t.period / PI);
    }
    for tau_tilde in [PI, 4.0 * PI, 16.0 * PI] {
        println!("average cos over {:.0} pi: {:+.6}", tau_tilde / PI, time_averaged_orientation(&s, &c, tau_tilde)?);
    }
    Ok(())
}
