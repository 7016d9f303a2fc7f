// Coarse map of time-averaged orientation over (η, ζ) and how its
// η-gradient lines up with the even-κ loci.
use planar_pendulum::sudden::{locus_alignment, topology_map, TopologyMapConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = TopologyMapConfig { n_eta: 24, n_zeta: 16, j_max: 32, ..Default::default() };
    let map = topology_map(&cfg)?;
    for i in (0..map.zetas.len()).step_by(5) {
        let row: Vec<String> = map.row(i).iter().step_by(3).map(|v| format!("{v:+.2}")).collect();
        println!("zeta {:5.1}: {}", map.zetas[i], row.join(" "));
    }
    let a = locus_alignment(&map);
    println!("even loci hit {}/{}, odd/even peak ratio {:.2}", a.even_hits, a.even_loci, a.odd_to_even_ratio());
    Ok(())
}
