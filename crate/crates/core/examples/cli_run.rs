// Drive a CLI run from code and read back the manifest.
use planar_pendulum::cli::{run, Command, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig {
        command: Command::Spectrum,
        eta_range: Some("-20:0:5".parse()?),
        n_states: 4,
        output: std::env::temp_dir().join("planar-pendulum-example"),
        ..Default::default()
    };
    let (_, manifest) = run(&cfg)?;
    for entry in &manifest.outputs {
        println!("{} {} bytes sha256 {}", entry.path, entry.bytes, entry.sha256);
    }
    print!("{}", std::fs::read_to_string(cfg.output.join("spectrum.csv"))?);
    Ok(())
}
