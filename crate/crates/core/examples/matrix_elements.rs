// Transition elements by basis algebra and by quadrature, plus the
// Hellmann-Feynman and kinetic identities they must satisfy.
use planar_pendulum::elements::{
    element_matrix, hellmann_feynman_residual, kinetic_identity_residual, Operator, QuadratureStates,
    DEFAULT_FD_STEP,
};
use planar_pendulum::rotor::InteractionParams;
use planar_pendulum::spectrum::solve_spectrum;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = InteractionParams::new(-7.0, 25.0)?;
    let s = solve_spectrum(&p, 5, 64)?;
    let cos = element_matrix(&s, Operator::Cos);
    let quad = QuadratureStates::new(&s)?;
    for n in 0..5 {
        for m in n..5 {
            let q = quad.element(n, m, Operator::Cos).value;
            println!("<{n}|cos|{m}> = {:+.10}  quadrature {:+.10}", cos[(n, m)], q);
        }
    }
    for n in 0..3 {
        let hf = hellmann_feynman_residual(&p, n, DEFAULT_FD_STEP, 64)?;
        let kin = kinetic_identity_residual(&p, n, 64)?;
        println!("state {n}: HF residual eta {:.1e} zeta {:.1e}, kinetic {:.1e}", hf.eta, hf.zeta, kin);
    }
    Ok(())
}
