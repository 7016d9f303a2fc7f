// At odd κ some eigenpairs are algebraic; compare them with the numerics.
use planar_pendulum::cqes::{algebraic_ansatz, algebraic_states};
use planar_pendulum::rotor::{InteractionParams, SymmetryLabel};
use planar_pendulum::spectrum::solve_spectrum;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = InteractionParams::new(-25.0, 25.0)?; // κ = 5
    let s = solve_spectrum(&p, 8, 64)?;
    for gamma in [SymmetryLabel::A1, SymmetryLabel::A2] {
        for a in algebraic_states(&p, gamma)? {
            let n = s.sector_indices(gamma)[a.sector_index];
            println!("{gamma} #{}  algebraic {:.12}  numeric {:.12}", a.sector_index, a.energy, s.states[n].energy);
        }
    }
    for n in 0..8 {
        if let Some(a) = algebraic_ansatz(&s, n)? {
            println!("state {n} ({}) v = {:?}  residual {:.1e}", a.gamma, a.v, a.residual);
        }
    }
    Ok(())
}
