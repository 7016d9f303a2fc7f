// Locate neighbouring-level crossings and compare with η = -κ√ζ.
use planar_pendulum::spectrum::crossing_scan;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for zeta in [16.0, 36.0] {
        for lower in 0..4 {
            for r in crossing_scan(zeta, (-4.5 * f64::sqrt(zeta), 0.0), lower, 200, 48)? {
                let locus = -(r.kappa as f64) * zeta.sqrt();
                println!(
                    "zeta {zeta:4} levels {}-{}  {:8} kappa {}  eta {:10.6} (locus {:8.4})  gap {:.2e}",
                    r.lower, r.upper, r.kind, r.kappa, r.eta_at_crossing, locus, r.min_gap
                );
            }
        }
    }
    Ok(())
}
