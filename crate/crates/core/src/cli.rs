//! Command-line driver: configuration, scans and file output.
//!
//! Every subcommand writes its tables (CSV or JSON) into the output
//! directory together with `manifest.json`, which records the resolved
//! configuration, the library version and a sha256 for each file.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cqes::{algebraic_ansatz, analytic_switch_off_coefficients};
use crate::elements::{hellmann_feynman_residual, kinetic_identity_residual, DEFAULT_FD_STEP};
use crate::error::{PendulumError, Result};
use crate::rotor::{free_rotor_wavefunction, make_grid, InteractionParams, RotorState, Wavefunction};
use crate::spectrum::{crossing_scan, solve_full_spectrum, solve_spectrum, CrossingKind, DEFAULT_J_MAX};
use crate::sudden::{
    switch_off_coefficients, switch_off_evolution, switch_on_evolution, tau_grid, time_averaged_orientation,
    topology_map, locus_alignment, SwitchOffCoefficients, SwitchOnCoefficients, TopologyMapConfig,
    SAMPLES_PER_PERIOD,
};
use crate::tdse::{pendular_populations, propagate, spectral_propagate, PulseSchedule, DEFAULT_DTAU};

pub const THREADS_ENV: &str = "PLANAR_PENDULUM_THREADS";

/// Inclusive `start:stop:step` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    /// Points start, start ± step, … up to stop within half a step.
    pub fn values(&self) -> Vec<f64> {
        let span = self.stop - self.start;
        let count = (span.abs() / self.step + 0.5).floor() as usize;
        let dir = span.signum();
        (0..=count).map(|k| self.start + dir * self.step * k as f64).collect()
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.start.min(self.stop), self.start.max(self.stop))
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got '{s}'"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("'{p}' in '{s}': {e}"));
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
            return Err(format!("range '{s}' needs finite ends and step > 0"));
        }
        Ok(Range { start, stop, step })
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl Serialize for Range {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Range {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Crossings,
    SwitchOff,
    SwitchOn,
    Propagate,
    TopologyMap,
    Validate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Crossings => "crossings",
            Command::SwitchOff => "switch-off",
            Command::SwitchOn => "switch-on",
            Command::Propagate => "propagate",
            Command::TopologyMap => "topology-map",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Fully resolved configuration of one run. The JSON form mirrors every flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub eta: f64,
    pub eta_range: Option<Range>,
    pub zeta: f64,
    pub zeta_range: Option<Range>,
    pub n_states: usize,
    /// Initial pendular state (switch-off, propagate).
    pub n0: Option<usize>,
    /// Initial rotor state (switch-on, propagate, topology-map).
    pub j0: Option<i64>,
    pub j_max: usize,
    pub grid_points: usize,
    pub dtau: f64,
    pub tau_tilde: f64,
    pub tau_end: f64,
    /// τ samples in time series.
    pub samples: usize,
    /// Points per η scan when locating crossings.
    pub resolution: usize,
    pub n_eta: usize,
    pub n_zeta: usize,
    pub schedule: Option<PulseSchedule>,
    pub output: PathBuf,
    pub format: Format,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Spectrum,
            eta: -10.0,
            eta_range: None,
            zeta: 25.0,
            zeta_range: None,
            n_states: 9,
            n0: None,
            j0: None,
            j_max: DEFAULT_J_MAX,
            grid_points: 512,
            dtau: DEFAULT_DTAU,
            tau_tilde: 4.0 * PI,
            tau_end: 4.0 * PI,
            samples: 2 * SAMPLES_PER_PERIOD + 1,
            resolution: 400,
            n_eta: 64,
            n_zeta: 64,
            schedule: None,
            output: PathBuf::from("out"),
            format: Format::Csv,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn etas(&self) -> Vec<f64> {
        self.eta_range.map_or_else(|| vec![self.eta], |r| r.values())
    }

    pub fn zetas(&self) -> Vec<f64> {
        self.zeta_range.map_or_else(|| vec![self.zeta], |r| r.values())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PendulumError::Config(msg));
        if self.j_max < 8 {
            return bad(format!("j_max must be >= 8 (got {})", self.j_max));
        }
        if self.n_states == 0 || self.n_states > 2 * self.j_max {
            return bad(format!("n_states must be in 1..={} (got {})", 2 * self.j_max, self.n_states));
        }
        if self.grid_points < 4 * self.j_max {
            return bad(format!("grid_points must be >= 4 j_max = {} (got {})", 4 * self.j_max, self.grid_points));
        }
        for (name, v) in [("dtau", self.dtau), ("tau_tilde", self.tau_tilde), ("tau_end", self.tau_end)] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be > 0 (got {v})"));
            }
        }
        if self.samples < 2 {
            return bad(format!("samples must be >= 2 (got {})", self.samples));
        }
        for eta in self.etas() {
            for zeta in self.zetas() {
                InteractionParams::new(eta, zeta).map_err(|e| PendulumError::Config(e.to_string()))?;
            }
        }
        if self.threads == Some(0) {
            return bad("threads must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "planar-pendulum", version, about = "Planar pendulum under orienting and aligning interactions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Lowest eigenvalues over an (η, ζ) scan.
    Spectrum(Flags),
    /// Refined crossings of neighbouring levels along η.
    Crossings(Flags),
    /// Rotor populations and field-free evolution after switch-off.
    SwitchOff(Flags),
    /// Pendular populations, evolution and time average after switch-on.
    SwitchOn(Flags),
    /// Split-operator propagation under a pulse schedule.
    Propagate(Flags),
    /// Time-averaged orientation over the (η, ζ) plane.
    TopologyMap(Flags),
    /// Run the invariant suite; exit status 0 iff every check passes.
    Validate(Flags),
}

/// Flags shared by every subcommand; each overrides the matching field of
/// the `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON file with any subset of the configuration fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// start:stop:step
    #[arg(long, allow_hyphen_values = true)]
    pub eta_range: Option<Range>,
    #[arg(long)]
    pub zeta: Option<f64>,
    /// start:stop:step
    #[arg(long)]
    pub zeta_range: Option<Range>,
    #[arg(long)]
    pub n_states: Option<usize>,
    #[arg(long)]
    pub n0: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub j0: Option<i64>,
    #[arg(long)]
    pub j_max: Option<usize>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub dtau: Option<f64>,
    #[arg(long)]
    pub tau_tilde: Option<f64>,
    #[arg(long)]
    pub tau_end: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub n_eta: Option<usize>,
    #[arg(long)]
    pub n_zeta: Option<usize>,
    /// JSON file holding a list of schedule segments.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; falls back to PLANAR_PENDULUM_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| PendulumError::Io(format!("{}: {e}", path.display())))?;
    // serde_json reports line and column
    serde_json::from_str(&text).map_err(|e| PendulumError::Config(format!("{}: {e}", path.display())))
}

/// Merge the config file (if any) with the flags; flags win.
pub fn resolve_config(command: Command, flags: &Flags) -> Result<RunConfig> {
    let mut cfg: RunConfig = match &flags.config {
        Some(path) => read_json(path)?,
        None => RunConfig::default(),
    };
    cfg.command = command;
    macro_rules! over {
        ($($f:ident),*) => { $( if let Some(v) = flags.$f.clone() { cfg.$f = v; } )* };
    }
    macro_rules! over_opt {
        ($($f:ident),*) => { $( if flags.$f.is_some() { cfg.$f = flags.$f.clone(); } )* };
    }
    over!(eta, zeta, n_states, j_max, grid_points, dtau, tau_tilde, tau_end, samples, resolution, n_eta, n_zeta, output, format);
    over_opt!(eta_range, zeta_range, n0, j0, threads);
    // a scalar flag replaces a range coming from the file
    if flags.eta.is_some() && flags.eta_range.is_none() {
        cfg.eta_range = None;
    }
    if flags.zeta.is_some() && flags.zeta_range.is_none() {
        cfg.zeta_range = None;
    }
    if let Some(path) = &flags.schedule {
        cfg.schedule = Some(read_json(path)?);
    }
    if cfg.threads.is_none() {
        if let Ok(v) = std::env::var(THREADS_ENV) {
            let n = v
                .trim()
                .parse()
                .map_err(|_| PendulumError::Config(format!("{THREADS_ENV}='{v}' is not a thread count")))?;
            cfg.threads = Some(n);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Cell of an output table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 15 significant digits, fixed layout.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.14e}")
    } else {
        v.to_string()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Int(v) => (*v).into(),
            Cell::Text(s) => s.clone().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&'static str]) -> Self {
        Self { name: name.to_string(), headers: headers.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                serde_json::Value::Object(
                    self.headers.iter().map(|h| h.to_string()).zip(row.iter().map(Cell::json)).collect(),
                )
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&rows).expect("table values serialize");
        text.push('\n');
        text
    }
}

/// What a command produced: tables plus free-form JSON documents.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub documents: Vec<(String, serde_json::Value)>,
    /// False when a validation check failed.
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub library_version: String,
    pub config: RunConfig,
    pub outputs: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Write every table and document plus `manifest.json`.
pub fn write_outputs(cfg: &RunConfig, output: &RunOutput) -> Result<Manifest> {
    fs::create_dir_all(&cfg.output)?;
    let mut entries = Vec::new();
    let mut write = |name: String, body: String| -> Result<()> {
        let path = cfg.output.join(&name);
        fs::write(&path, body.as_bytes())?;
        entries.push(ManifestEntry { path: name, bytes: body.len(), sha256: sha256_hex(body.as_bytes()) });
        Ok(())
    };
    for t in &output.tables {
        match cfg.format {
            Format::Csv => write(format!("{}.csv", t.name), t.to_csv())?,
            Format::Json => write(format!("{}.json", t.name), t.to_json())?,
        }
    }
    for (name, doc) in &output.documents {
        let mut body = serde_json::to_string_pretty(doc)?;
        body.push('\n');
        write(format!("{name}.json"), body)?;
    }
    let manifest = Manifest {
        command: cfg.command.name().to_string(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        outputs: entries,
    };
    let mut body = serde_json::to_string_pretty(&manifest)?;
    body.push('\n');
    fs::write(cfg.output.join("manifest.json"), body)?;
    Ok(manifest)
}

fn grid_points(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let etas = cfg.etas();
    cfg.zetas().into_iter().flat_map(|z| etas.iter().map(move |&e| (e, z))).collect()
}

fn params(eta: f64, zeta: f64) -> Result<InteractionParams> {
    InteractionParams::new(eta, zeta)
}

fn run_spectrum(cfg: &RunConfig) -> Result<RunOutput> {
    let rows = grid_points(cfg)
        .par_iter()
        .map(|&(eta, zeta)| {
            let s = solve_spectrum(&params(eta, zeta)?, cfg.n_states, cfg.j_max)?;
            Ok(s.states
                .iter()
                .enumerate()
                .map(|(n, st)| {
                    vec![eta.into(), zeta.into(), n.into(), st.label.to_string().into(), st.energy.into()]
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("spectrum", &["eta", "zeta", "n", "symmetry", "energy"]);
    rows.into_iter().flatten().for_each(|r| t.push(r));
    Ok(RunOutput { tables: vec![t], success: true, ..Default::default() })
}

fn run_crossings(cfg: &RunConfig) -> Result<RunOutput> {
    let bounds = cfg.eta_range.map_or((-40.0, 0.0), |r| r.bounds());
    let jobs: Vec<(f64, usize)> = cfg
        .zetas()
        .into_iter()
        .flat_map(|z| (0..cfg.n_states.saturating_sub(1)).map(move |l| (z, l)))
        .collect();
    let found = jobs
        .par_iter()
        .map(|&(zeta, lower)| crossing_scan(zeta, bounds, lower, cfg.resolution, cfg.j_max))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(
        "crossings",
        &["zeta", "lower", "upper", "kind", "kappa", "eta_at_crossing", "kappa_sqrt_zeta", "min_gap"],
    );
    for r in found.into_iter().flatten() {
        t.push(vec![
            r.zeta.into(),
            r.lower.into(),
            r.upper.into(),
            r.kind.to_string().into(),
            r.kappa.into(),
            r.eta_at_crossing.into(),
            (-(r.kappa as f64) * r.zeta.sqrt()).into(),
            r.min_gap.into(),
        ]);
    }
    Ok(RunOutput { tables: vec![t], success: true, ..Default::default() })
}

fn run_switch_off(cfg: &RunConfig) -> Result<RunOutput> {
    let n0 = cfg.n0.unwrap_or(0);
    let taus = tau_grid(cfg.tau_end, cfg.samples);
    let results = grid_points(cfg)
        .par_iter()
        .map(|&(eta, zeta)| {
            let s = solve_spectrum(&params(eta, zeta)?, n0 + 1, cfg.j_max)?;
            let c = switch_off_coefficients(&s, n0, cfg.j_max)?;
            let series = switch_off_evolution(&c, &taus)?;
            Ok((eta, zeta, c, series))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pops = Table::new("switch_off_populations", &["eta", "zeta", "n0", "symmetry", "j", "probability"]);
    let mut ser = Table::new("switch_off_series", &["eta", "zeta", "tau", "cos", "cos2", "j2"]);
    for (eta, zeta, c, series) in results {
        for p in c.populations() {
            if let crate::sudden::PopulationIndex::Rotor { j } = p.index {
                pops.push(vec![eta.into(), zeta.into(), n0.into(), c.gamma.to_string().into(), j.into(), p.probability.into()]);
            }
        }
        for k in 0..taus.len() {
            ser.push(vec![
                eta.into(),
                zeta.into(),
                taus[k].into(),
                series.cos.values[k].into(),
                series.cos2.values[k].into(),
                series.j2.values[k].into(),
            ]);
        }
    }
    Ok(RunOutput { tables: vec![pops, ser], success: true, ..Default::default() })
}

fn run_switch_on(cfg: &RunConfig) -> Result<RunOutput> {
    let j0 = cfg.j0.unwrap_or(1);
    let taus = tau_grid(cfg.tau_end, cfg.samples);
    let results = grid_points(cfg)
        .par_iter()
        .map(|&(eta, zeta)| {
            let s = solve_full_spectrum(&params(eta, zeta)?, cfg.j_max)?;
            let c = SwitchOnCoefficients::from_spectrum(&s, j0)?;
            let series = switch_on_evolution(&s, &c, &taus)?;
            let avg = time_averaged_orientation(&s, &c, cfg.tau_tilde)?;
            Ok((eta, zeta, s.labels(), c, series, avg))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pops = Table::new("switch_on_populations", &["eta", "zeta", "j0", "n", "symmetry", "probability"]);
    let mut ser = Table::new(
        "switch_on_series",
        &["eta", "zeta", "tau", "cos", "cos2", "j2", "energy", "cos_population", "cos_coherence_a1", "cos_coherence_a2"],
    );
    let mut avg_t = Table::new("switch_on_time_average", &["eta", "zeta", "j0", "tau_tilde", "avg_cos"]);
    for (eta, zeta, labels, c, s, avg) in results {
        for (n, v) in c.values().iter().enumerate().take(cfg.n_states) {
            pops.push(vec![eta.into(), zeta.into(), j0.into(), n.into(), labels[n].to_string().into(), v.norm_sqr().into()]);
        }
        for k in 0..taus.len() {
            ser.push(vec![
                eta.into(),
                zeta.into(),
                taus[k].into(),
                s.cos.values[k].into(),
                s.cos2.values[k].into(),
                s.j2.values[k].into(),
                s.energy.values[k].into(),
                s.cos_population.into(),
                s.cos_coherence_a1[k].into(),
                s.cos_coherence_a2[k].into(),
            ]);
        }
        avg_t.push(vec![eta.into(), zeta.into(), j0.into(), cfg.tau_tilde.into(), avg.into()]);
    }
    Ok(RunOutput { tables: vec![pops, ser, avg_t], success: true, ..Default::default() })
}

fn run_propagate(cfg: &RunConfig) -> Result<RunOutput> {
    let schedule = match &cfg.schedule {
        Some(s) => s.clone(),
        None => PulseSchedule::frozen(params(cfg.eta, cfg.zeta)?, cfg.tau_end)?,
    };
    let grid = make_grid(cfg.grid_points)?;
    let (eta0, zeta0) = schedule.at(0.0);
    let psi0: Wavefunction = match cfg.n0 {
        Some(n0) => solve_spectrum(&params(eta0, zeta0)?, n0 + 1, cfg.j_max)?.wavefunction(n0, &grid)?,
        None => free_rotor_wavefunction(RotorState::new(cfg.j0.unwrap_or(0)), &grid)?,
    };
    let total = schedule.total_duration();
    let steps = (total / cfg.dtau).ceil().max(1.0) as usize;
    let stride = (steps / (cfg.samples - 1)).max(1);
    let traj = propagate(&psi0, &schedule, cfg.dtau, stride)?;
    let mut t = Table::new("propagate_trajectory", &["tau", "eta", "zeta", "cos", "cos2", "j2", "norm"]);
    for (k, &tau) in traj.tau_samples.iter().enumerate() {
        let (eta, zeta) = schedule.at(tau);
        t.push(vec![
            tau.into(),
            eta.into(),
            zeta.into(),
            traj.cos.values[k].into(),
            traj.cos2.values[k].into(),
            traj.j2.values[k].into(),
            traj.norms[k].into(),
        ]);
    }
    let (eta1, zeta1) = schedule.at(total);
    let end = solve_spectrum(&params(eta1, zeta1)?, cfg.n_states, cfg.j_max)?;
    let pops = pendular_populations(traj.final_state(), &end)?;
    let mut p = Table::new("propagate_final_populations", &["eta", "zeta", "n", "symmetry", "probability"]);
    for (n, prob) in pops.into_iter().enumerate() {
        p.push(vec![eta1.into(), zeta1.into(), n.into(), end.states[n].label.to_string().into(), prob.into()]);
    }
    Ok(RunOutput { tables: vec![t, p], success: true, ..Default::default() })
}

fn run_topology_map(cfg: &RunConfig) -> Result<RunOutput> {
    let map_cfg = TopologyMapConfig {
        eta_range: cfg.eta_range.map_or((-35.0, 0.0), |r| r.bounds()),
        zeta_range: cfg.zeta_range.map_or((5.0, 40.0), |r| r.bounds()),
        n_eta: cfg.n_eta,
        n_zeta: cfg.n_zeta,
        j0: cfg.j0.unwrap_or(1),
        tau_tilde: cfg.tau_tilde,
        j_max: cfg.j_max,
    };
    let map = topology_map(&map_cfg)?;
    let mut t = Table::new("topology_map", &["eta", "zeta", "avg_cos", "abs_d_avg_cos_d_eta"]);
    for (i, &zeta) in map.zetas.iter().enumerate() {
        let d = map.eta_derivative(i);
        for (j, &eta) in map.etas.iter().enumerate() {
            t.push(vec![eta.into(), zeta.into(), map.at(i, j).into(), d[j].into()]);
        }
    }
    let align = locus_alignment(&map);
    let docs = vec![
        ("topology_overlays".to_string(), serde_json::to_value(&map.overlays)?),
        (
            "topology_alignment".to_string(),
            serde_json::json!({
                "even_loci": align.even_loci,
                "even_hits": align.even_hits,
                "hit_fraction": align.hit_fraction(),
                "odd_loci": align.odd_loci,
                "even_mean_peak": align.even_mean_peak,
                "odd_mean_peak": align.odd_mean_peak,
                "odd_to_even_ratio": align.odd_to_even_ratio(),
            }),
        ),
    ];
    Ok(RunOutput { tables: vec![t], documents: docs, success: true })
}

/// Outcome of one validation check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn below(name: &'static str, value: f64, threshold: f64) -> Self {
        Self { name, value, threshold, pass: value < threshold }
    }

    fn above(name: &'static str, value: f64, threshold: f64) -> Self {
        Self { name, value, threshold, pass: value > threshold }
    }
}

/// The invariant suite behind `validate`.
pub fn validation_checks(j_max: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let free = solve_spectrum(&InteractionParams::free(), 9, j_max)?;
    let expected = [0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0, 16.0, 16.0];
    let dev = free.energies().iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    out.push(Check::below("free_rotor_spectrum", dev, 1e-10));

    for (name, kappa, want_genuine) in [("crossing_kappa1_zeta25", 1.0, true), ("crossing_kappa2_zeta25", 2.0, false)] {
        let centre = -kappa * 5.0;
        let recs = crossing_scan(25.0, (centre - 1.0, centre + 1.0), kappa as usize, 41, j_max)?;
        let hit = recs.iter().find(|r| (r.eta_at_crossing - centre).abs() < 0.05);
        let ok = hit.is_some_and(|r| (r.kind == CrossingKind::Genuine) == want_genuine);
        out.push(Check { name, value: hit.map_or(f64::NAN, |r| r.eta_at_crossing - centre), threshold: 0.05, pass: ok });
    }

    let s = solve_spectrum(&params(-15.0, 25.0)?, 3, j_max)?;
    let mut worst: f64 = 0.0;
    for n in 0..3 {
        if let Some(a) = algebraic_ansatz(&s, n)? {
            let analytic = analytic_switch_off_coefficients(&a, j_max)?;
            let quad = switch_off_coefficients(&s, n, j_max)?;
            for j in analytic.momenta() {
                worst = worst.max((analytic.get(j) - quad.get(j)).norm());
            }
        }
    }
    out.push(Check::below("analytic_vs_quadrature_kappa3", worst, 1e-8));

    let s = solve_spectrum(&params(-10.0, 25.0)?, 2, j_max)?;
    let (mut sym, mut pars) = (0.0f64, 0.0f64);
    for n in 0..2 {
        let c = SwitchOffCoefficients::from_spectrum(&s, n, j_max)?;
        sym = sym.max(c.symmetry_defect());
        pars = pars.max(c.parseval_defect());
    }
    out.push(Check::below("switch_off_symmetry", sym, 1e-12));
    out.push(Check::below("switch_off_parseval", pars, 1e-8));

    let c = SwitchOffCoefficients::from_spectrum(&s, 0, j_max)?;
    let taus = tau_grid(2.0 * PI, 1025);
    let shift = |d: f64| taus.iter().map(|t| t + d).collect::<Vec<_>>();
    let a = switch_off_evolution(&c, &taus)?;
    let half = switch_off_evolution(&c, &shift(PI))?;
    let full = switch_off_evolution(&c, &shift(2.0 * PI))?;
    let quarter = switch_off_evolution(&c, &shift(PI / 2.0))?;
    let anti = a.cos.values.iter().zip(&half.cos.values).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
    out.push(Check::below("revival_full_period", a.cos.max_deviation(&full.cos), 1e-10));
    out.push(Check::below("revival_half_period_sign", anti, 1e-10));
    out.push(Check::below("alignment_quarter_period", a.cos2.max_deviation(&quarter.cos2), 1e-10));

    let full_s = solve_full_spectrum(&params(-10.0, 25.0)?, j_max)?;
    let on = SwitchOnCoefficients::from_spectrum(&full_s, 1)?;
    let ev = switch_on_evolution(&full_s, &on, &tau_grid(PI, 3))?;
    out.push(Check::below("switch_on_energy", (ev.energy.values[0] - (1.0 - 12.5)).abs(), 1e-8));

    let mut kin: f64 = 0.0;
    for n in 0..=6 {
        kin = kin.max(kinetic_identity_residual(&params(-10.0, 25.0)?, n, j_max)?);
    }
    out.push(Check::below("kinetic_identity", kin, 1e-9));

    let hf = hellmann_feynman_residual(&params(-7.0, 25.0)?, 0, DEFAULT_FD_STEP, j_max)?;
    out.push(Check::below("hellmann_feynman", hf.eta.max(hf.zeta), 1e-6));

    let grid = make_grid(4 * j_max.max(64))?;
    let p = params(-10.0, 25.0)?;
    let psi0 = free_rotor_wavefunction(RotorState::new(1), &grid)?;
    let sched = PulseSchedule::frozen(p, 10.0)?;
    let traj = propagate(&psi0, &sched, 1e-3, 10_000)?;
    out.push(Check::below("propagator_norm_drift", traj.norm_drift(), 1e-10));

    let sched = PulseSchedule::frozen(p, 2.0 * PI)?;
    let traj = propagate(&psi0, &sched, 1e-3, usize::MAX)?;
    let reference = spectral_propagate(&psi0, &full_s, 2.0 * PI)?;
    out.push(Check::below("propagator_vs_spectral", traj.final_state().distance(&reference), 1e-7));

    let pops = pendular_populations(traj.final_state(), &full_s)?;
    let total: f64 = pops.iter().sum();
    out.push(Check::above("propagated_population_total", total, 1.0 - 1e-8));
    Ok(out)
}

fn run_validate(cfg: &RunConfig) -> Result<RunOutput> {
    let checks = validation_checks(cfg.j_max)?;
    let mut t = Table::new("validate", &["check", "value", "threshold", "pass"]);
    for c in &checks {
        t.push(vec![c.name.into(), c.value.into(), c.threshold.into(), c.pass.into()]);
    }
    Ok(RunOutput { tables: vec![t], documents: Vec::new(), success: checks.iter().all(|c| c.pass) })
}

/// Execute one resolved configuration and write its files.
pub fn run(cfg: &RunConfig) -> Result<(RunOutput, Manifest)> {
    let work = || match cfg.command {
        Command::Spectrum => run_spectrum(cfg),
        Command::Crossings => run_crossings(cfg),
        Command::SwitchOff => run_switch_off(cfg),
        Command::SwitchOn => run_switch_on(cfg),
        Command::Propagate => run_propagate(cfg),
        Command::TopologyMap => run_topology_map(cfg),
        Command::Validate => run_validate(cfg),
    };
    let output = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PendulumError::Config(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let manifest = write_outputs(cfg, &output)?;
    Ok((output, manifest))
}

fn split(args: &CommandArgs) -> (Command, &Flags) {
    match args {
        CommandArgs::Spectrum(f) => (Command::Spectrum, f),
        CommandArgs::Crossings(f) => (Command::Crossings, f),
        CommandArgs::SwitchOff(f) => (Command::SwitchOff, f),
        CommandArgs::SwitchOn(f) => (Command::SwitchOn, f),
        CommandArgs::Propagate(f) => (Command::Propagate, f),
        CommandArgs::TopologyMap(f) => (Command::TopologyMap, f),
        CommandArgs::Validate(f) => (Command::Validate, f),
    }
}

/// Parse `args`, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (command, flags) = split(&cli.command);
    let result = resolve_config(command, flags).and_then(|cfg| run(&cfg));
    match result {
        Ok((output, manifest)) => {
            for entry in &manifest.outputs {
                println!("{}  {}", entry.sha256, entry.path);
            }
            if output.success {
                0
            } else {
                eprintln!("validation failed");
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        let r: Range = "-40:0:0.1".parse().unwrap();
        let v = r.values();
        assert_eq!(v.len(), 401);
        assert_eq!(v[0], -40.0);
        assert!((v[400] - 0.0).abs() < 1e-9);
        let down: Range = "1:0:0.3".parse().unwrap();
        assert_eq!(down.values().len(), 4);
        assert!("1:2".parse::<Range>().is_err());
        assert!("1:2:0".parse::<Range>().is_err());
        assert!("a:2:1".parse::<Range>().is_err());
    }

    #[test]
    fn float_format_has_15_digits() {
        assert_eq!(format_float(0.1), "1.00000000000000e-1");
        assert_eq!(format_float(-25.0), "-2.50000000000000e1");
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"zeta": 16.0, "eta_range": "-8:0:1", "n_states": 4}"#).unwrap();
        let flags = Flags { config: Some(path), n_states: Some(6), threads: Some(2), ..Default::default() };
        let cfg = resolve_config(Command::Spectrum, &flags).unwrap();
        assert_eq!(cfg.zeta, 16.0);
        assert_eq!(cfg.n_states, 6);
        assert_eq!(cfg.etas().len(), 9);
        let flags = Flags { config: flags.config.clone(), eta: Some(-3.0), ..Default::default() };
        assert_eq!(resolve_config(Command::Spectrum, &flags).unwrap().etas(), vec![-3.0]);
    }

    #[test]
    fn bad_config_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, "{\n  \"zeta\": 16.0,\n  \"bogus\": 1\n}").unwrap();
        let err = resolve_config(Command::Spectrum, &Flags { config: Some(path), ..Default::default() }).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = resolve_config(Command::Spectrum, &Flags { eta: Some(1.0), ..Default::default() }).unwrap_err();
        assert!(matches!(err, PendulumError::Config(_)));
    }

    #[test]
    fn csv_and_json_tables() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![1.5.into(), "x,y".into()]);
        assert_eq!(t.to_csv(), "a,b\n1.50000000000000e0,\"x,y\"\n");
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v[0]["a"], 1.5);
    }
}
