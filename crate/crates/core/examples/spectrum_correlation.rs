// Lowest levels along an η sweep at fixed ζ, labelled by parity.
use planar_pendulum::rotor::{topological_index, InteractionParams};
use planar_pendulum::spectrum::solve_spectrum;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let zeta = 25.0;
    println!("{:>7} {:>6}  lowest six levels", "eta", "kappa");
    for k in 0..=8 {
        let eta = -2.5 * k as f64;
        let p = InteractionParams::new(eta, zeta)?;
        let s = solve_spectrum(&p, 6, 48)?;
        let kappa = topological_index(&p)?.kappa;
        let levels: Vec<String> = s.states.iter().map(|st| format!("{:9.4}{}", st.energy, st.label)).collect();
        println!("{eta:7.2} {kappa:6.2}  {}", levels.join(" "));
    }
    Ok(())
}
