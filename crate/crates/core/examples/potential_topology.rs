// Well shape of V(θ) and the topological index κ for a few parameter pairs.
use planar_pendulum::rotor::{potential_shape, topological_index, InteractionParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (eta, zeta) in [(-5.0, 25.0), (-10.0, 25.0), (-15.0, 25.0), (-50.0, 25.0), (-12.0, 0.0)] {
        let p = InteractionParams::new(eta, zeta)?;
        let shape = potential_shape(&p);
        let kappa = match topological_index(&p) {
            Ok(k) if k.is_genuine_locus() => format!("{:.3} (genuine crossings)", k.kappa),
            Ok(k) if k.is_avoided_locus() => format!("{:.3} (avoided crossings)", k.kappa),
            Ok(k) => format!("{:.3}", k.kappa),
            Err(e) => e.to_string(),
        };
        println!("eta {eta:6} zeta {zeta:5}  {:?}  barrier {:?}  kappa {kappa}", shape.kind, shape.barrier_angle);
    }
    Ok(())
}
