//! End-to-end runs of the binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use planar_pendulum::cli::sha256_hex;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_planar-pendulum"))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn spectrum_run_is_deterministic_and_checksummed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let status = bin()
            .args(["spectrum", "--zeta", "25", "--eta-range", "-4:0:0.5", "--n-states", "5", "-o"])
            .arg(out)
            .env("PLANAR_PENDULUM_THREADS", "2")
            .status()
            .unwrap();
        assert!(status.success());
    }
    let body = fs::read(a.join("spectrum.csv")).unwrap();
    assert_eq!(body, fs::read(b.join("spectrum.csv")).unwrap());
    let text = String::from_utf8(body.clone()).unwrap();
    assert_eq!(text.lines().count(), 1 + 9 * 5);
    assert!(text.starts_with("eta,zeta,n,symmetry,energy\n-4.00000000000000e0,2.50000000000000e1,0,A1,"));
    let m = manifest(&a);
    assert_eq!(m["library_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["config"]["threads"], 2);
    assert_eq!(m["outputs"][0]["sha256"], sha256_hex(&body));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"eta": -10, "zeta": 25, "n0": 0, "tau_end": 1.0, "samples": 3, "format": "json"}"#).unwrap();
    let out = dir.path().join("o");
    let status = bin().args(["switch-off", "--zeta", "16", "--config"]).arg(&cfg).arg("-o").arg(&out).status().unwrap();
    assert!(status.success());
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("switch_off_series.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
    assert_eq!(rows[0]["zeta"], 16.0);
    assert_eq!(rows[0]["eta"], -10.0);
    assert_eq!(manifest(&out)["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn invalid_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\n  \"eta\": -1,\n  \"zeta\": \"many\"\n}\n").unwrap();
    let out = bin().args(["spectrum", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn rejects_positive_eta_and_bad_range() {
    let out = bin().args(["spectrum", "--eta", "2"]).output().unwrap();
    assert!(!out.status.success());
    let out = bin().args(["spectrum", "--eta-range", "0:-4"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn propagate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("pulse.json");
    fs::write(
        &sched,
        r#"[{"duration": 0.5, "eta": {"kind": "linear", "from": 0, "to": -10}, "zeta": {"kind": "constant", "value": 25}}]"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let status = bin()
        .args(["propagate", "--j0", "1", "--dtau", "0.005", "--samples", "11", "--schedule"])
        .arg(&sched)
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(out.join("propagate_trajectory.csv")).unwrap();
    assert_eq!(text.lines().count(), 12);
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert!((last[1].parse::<f64>().unwrap() + 10.0).abs() < 1e-12);
    assert!((last[6].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
}
