// Modified Bessel values and the e^{ζ cos θ} moments built from them.
use planar_pendulum::bessel::{modified_bessel_i, BesselTable};
use planar_pendulum::elements::{exp_cos_integral, exp_cos_quadrature, ExpCosWeight};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for x in [0.5, 5.0, 50.0] {
        let table = BesselTable::new(8, x)?;
        println!("x {x:5}: I0 {:.6e} I1 {:.6e} I8 {:.6e}  recurrence {:.1e}", table.get(0), table.get(1), table.get(8), table.recurrence_residual());
    }
    println!("I_3(2) = {:.15}", modified_bessel_i(3, 2.0)?);
    for weight in [ExpCosWeight::One, ExpCosWeight::Cos, ExpCosWeight::Sin2Cos2] {
        let closed = exp_cos_integral(4, 10.0, weight)?;
        let quad = exp_cos_quadrature(4, 10.0, weight, 2048)?;
        println!("{weight:?}: closed {closed:.12e} quadrature {quad:.12e}");
    }
    Ok(())
}
