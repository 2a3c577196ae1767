//! Command-line experiment runner. Each subcommand writes CSV data, the
//! resolved `config.toml`, a flat `summary.json` and a `timing.json` into
//! the output directory. Everything except `timing.json` is a pure function
//! of the resolved config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, DEFAULT_PRESET};
use crate::detection::{
    detect, hbt_histogram, hom_visibility, visibility_scan, CoincidenceDensity, Detector, WaveplateMode,
};
use crate::error::ConfigError;
use crate::model::units::rad_to_mhz;
use crate::source::{
    atom_stream, conditional_probabilities, peak_flux_times, run_sequence, run_sequence_position_averaged,
    ConditionalEstimate, TransitMode,
};

/// Coincidence counts below which HBT peak ratios are flagged.
pub const MIN_PEAK_COUNTS: f64 = 20.0;

#[derive(Debug, Parser)]
#[command(
    name = "polsource",
    version,
    about = "Polarization-controlled single-photon source simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML experiment config; omitted keys take built-in values.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Built-in parameter set.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,

    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Overrides `run.output_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Master-equation photon envelopes for the pulse program.
    Envelope,
    /// Click-level HBT histogram from a Poisson atom stream.
    Hbt,
    /// Conditional polarization probabilities from quantum-jump trajectories.
    Conditional,
    /// Two-photon interference visibility for one (Ω₀, t_p).
    Hom,
    /// Visibility and conditionals over the scan grid.
    Scan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Envelope => "envelope",
            Command::Hbt => "hbt",
            Command::Conditional => "conditional",
            Command::Hom => "hom",
            Command::Scan => "scan",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 2,
    Runtime = 3,
    LowStatistics = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Config(_) => ExitStatus::Usage,
            CliError::Runtime(_) => ExitStatus::Runtime,
        }
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Headline numbers and warnings of one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub headline: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    /// File name and contents, written in order.
    pub files: Vec<(String, String)>,
}

impl Report {
    fn put<V: Into<Value>>(&mut self, key: &str, v: V) {
        self.headline.insert(key.to_string(), v.into());
    }

    fn put_f64(&mut self, key: &str, v: f64) {
        let v = serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number);
        self.headline.insert(key.to_string(), v);
    }

    fn put_opt(&mut self, key: &str, v: Option<f64>) {
        match v {
            Some(v) => self.put_f64(key, v),
            None => {
                self.headline.insert(key.to_string(), Value::Null);
            }
        }
    }

    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }
}

/// Loads the config named by the flags and applies overrides.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => ExperimentConfig::preset(DEFAULT_PRESET)?,
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.run.output_dir = out.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs `command` on a validated config without touching the filesystem.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<Report, CliError> {
    match command {
        Command::Envelope => envelope(cfg),
        Command::Hbt => hbt(cfg),
        Command::Conditional => conditional(cfg),
        Command::Hom => hom(cfg),
        Command::Scan => scan(cfg),
    }
}

/// Full run: validate, execute, write. Errors are reported on stderr.
pub fn run(cli: &Cli) -> ExitStatus {
    let cfg = match resolve_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::Usage;
        }
    };
    let start = Instant::now();
    let report = match execute(cli.command, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.status();
        }
    };
    let wall = start.elapsed().as_secs_f64();
    if let Err(e) = write_outputs(Path::new(&cfg.run.output_dir), cli.command, &cfg, &report, wall) {
        eprintln!("error: {e}");
        return ExitStatus::Runtime;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if report.warnings.is_empty() {
        ExitStatus::Success
    } else {
        ExitStatus::LowStatistics
    }
}

/// Resolved config as recorded next to the outputs. `run.output_dir` is
/// reset so that identical runs into different directories match.
pub fn recorded_config(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.run.output_dir = crate::config::RunSection::default().output_dir;
    c.to_toml()
}

pub fn summary_json(command: Command, cfg: &ExperimentConfig, report: &Report) -> String {
    let resolved = recorded_config(cfg);
    let mut map: BTreeMap<String, Value> = report.headline.clone();
    map.insert("command".into(), command.name().into());
    map.insert("config_sha256".into(), hex(&Sha256::digest(resolved.as_bytes())).into());
    map.insert("seed".into(), cfg.run.seed.into());
    map.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    map.insert("warnings".into(), report.warnings.clone().into());
    let mut s = serde_json::to_string_pretty(&map).expect("summary serializes");
    s.push('\n');
    s
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn write_outputs(
    dir: &Path,
    command: Command,
    cfg: &ExperimentConfig,
    report: &Report,
    wall_time: f64,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    let write = |name: &str, text: &str| {
        std::fs::write(dir.join(name), text).map_err(|e| CliError::Runtime(format!("{name}: {e}")))
    };
    for (name, text) in &report.files {
        write(name, text)?;
    }
    write("config.toml", &recorded_config(cfg))?;
    write("summary.json", &summary_json(command, cfg, report))?;
    let timing = serde_json::json!({ "command": command.name(), "wall_time_s": wall_time });
    write(
        "timing.json",
        &format!("{}\n", serde_json::to_string_pretty(&timing).expect("json")),
    )
}

fn envelope(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.model()?;
    let program = cfg.program(&model)?;
    let transit = cfg.transit()?;
    let initial = cfg.initial()?;
    let env = if cfg.transit.position_average {
        run_sequence_position_averaged(&model, &program, &transit, &initial)
    } else {
        run_sequence(&model, &program, &transit, &initial)
    }
    .map_err(runtime)?;

    let mut r = Report::default();
    let mut slots = String::from("slot,start_s,pump,plus,minus\n");
    let (mut pp, mut pm, mut mp, mut mm, mut np, mut nm) = (0.0, 0.0, 0.0, 0.0, 0usize, 0usize);
    for s in &env.slots {
        let pump = if s.generates_plus { "omega_plus" } else { "omega_minus" };
        let _ = writeln!(slots, "{},{:e},{},{:e},{:e}", s.slot, s.start, pump, s.plus, s.minus);
        if s.generates_plus {
            pp += s.plus;
            pm += s.minus;
            np += 1;
        } else {
            mp += s.plus;
            mm += s.minus;
            nm += 1;
        }
    }
    let ratio = |a: f64, b: f64| (b > 0.0).then(|| a / b);
    // Per-pulse σ⁺ output under ω₊ over σ⁺ output under ω₋, and mirrored.
    let (np, nm) = (np.max(1) as f64, nm.max(1) as f64);
    r.put_opt("switching_ratio_plus", ratio(pp / np, mp / nm));
    r.put_opt("switching_ratio_minus", ratio(mm / nm, pm / np));
    r.put_f64("photons_plus", env.total_plus());
    r.put_f64("photons_minus", env.total_minus());
    let peaks = peak_flux_times(&env);
    r.put_opt("peak_time_plus_s", peaks.plus);
    r.put_opt("peak_time_minus_s", peaks.minus);
    r.file("envelope.csv", env.to_csv());
    r.file("slots.csv", slots);
    Ok(r)
}

/// HBT always uses a Gaussian transit and the balanced, single-delay
/// detection path.
fn hbt(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.model()?;
    let program = cfg.program(&model)?;
    let mut transit = cfg.transit()?;
    transit.mode = TransitMode::Gaussian;
    let initial = cfg.initial()?;
    let mut detection = cfg.detection();
    detection.waveplate_mode = WaveplateMode::Balanced;
    detection.long_fiber_open = false;
    let window = cfg.run.stream_window_ms * 1e-3;
    let seed = cfg.run.seed;

    let stream = atom_stream(&model, &program, &transit, &initial, window, seed).map_err(runtime)?;
    let clicks = detect(&stream.record, &detection, (0.0, window), seed ^ 0xD5).map_err(runtime)?;
    let hist = hbt_histogram(&clicks, detection.bin_width, cfg.run.tau_max_us * 1e-6).map_err(runtime)?;

    let mut r = Report::default();
    r.put("atoms", stream.arrivals.len());
    r.put("emissions_output", stream.record.outputs().count());
    r.put("clicks_d1", clicks.count(Detector::D1));
    r.put("clicks_d2", clicks.count(Detector::D2));
    r.put("coincidences", hist.total());
    if hist.is_empty() {
        r.warnings
            .push("no coincidences: one detector recorded no clicks".into());
        r.put_opt("center_ratio", None);
        r.put_opt("nearest_to_outer", None);
    } else {
        let peaks = hist.peaks(program.period);
        r.put_f64("center_counts", peaks.center);
        r.put_f64("nearest_counts", peaks.nearest);
        r.put_opt("outer_counts", peaks.outer);
        r.put_opt("center_ratio", peaks.center_ratio);
        r.put_opt("nearest_to_outer", peaks.nearest_to_outer);
        if peaks.nearest < MIN_PEAK_COUNTS {
            r.warnings.push(format!(
                "low statistics: nearest side peaks hold {:.1} counts (< {MIN_PEAK_COUNTS})",
                peaks.nearest
            ));
        }
    }
    r.file("hbt.csv", hist.to_csv());
    r.file("clicks.csv", clicks.to_csv());
    Ok(r)
}

fn put_estimate(r: &mut Report, key: &str, e: &ConditionalEstimate) {
    r.put_f64(key, e.probability);
    r.put_f64(&format!("{key}_std_error"), e.std_error);
    r.put(&format!("{key}_conditioning"), e.conditioning);
    if e.low_statistics {
        r.warnings.push(format!(
            "low statistics: {key} conditioned on {} events",
            e.conditioning
        ));
    }
}

fn conditional(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.model()?;
    let program = cfg.program(&model)?;
    let c = conditional_probabilities(
        &model,
        &program,
        &cfg.transit()?,
        &cfg.initial()?,
        cfg.run.trajectories,
        cfg.run.seed,
    )
    .map_err(runtime)?;
    let mut r = Report::default();
    r.put("trajectories", c.trajectories);
    put_estimate(&mut r, "p_plus_given_minus", &c.plus_given_minus);
    put_estimate(&mut r, "p_minus_given_plus", &c.minus_given_plus);
    let mut csv = String::from("quantity,probability,std_error,successes,conditioning\n");
    for (name, e) in [
        ("p_plus_given_minus", &c.plus_given_minus),
        ("p_minus_given_plus", &c.minus_given_plus),
    ] {
        let _ = writeln!(
            csv,
            "{name},{},{},{},{}",
            e.probability, e.std_error, e.successes, e.conditioning
        );
    }
    r.file("conditional.csv", csv);
    Ok(r)
}

fn density_csv(d: &CoincidenceDensity) -> String {
    let t = d.times();
    let mut s = String::with_capacity(40 * t.len() * t.len());
    s.push_str("t1_s,t2_s,density\n");
    for (i, ti) in t.iter().enumerate() {
        for (j, tj) in t.iter().enumerate() {
            let _ = writeln!(s, "{ti:e},{tj:e},{:e}", d.get(i, j));
        }
    }
    s
}

fn hom(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.model()?;
    let omega0 = crate::model::units::mhz_to_rad(cfg.pulses.omega0_mhz);
    let t_p = cfg.pulses.tp_us * 1e-6;
    let h = hom_visibility(
        &model,
        omega0,
        t_p,
        &cfg.transit()?,
        cfg.detection.bs_overlap,
        cfg.run.hom_grid_points,
    )
    .map_err(runtime)?;
    let mut r = Report::default();
    r.put_f64("omega0_mhz", rad_to_mhz(omega0));
    r.put_f64("tp_us", cfg.pulses.tp_us);
    r.put_f64("visibility", h.visibility);
    r.put_f64("clamped_parallel", h.parallel.clamped);
    let mut tau = String::from("tau_s,parallel,perpendicular\n");
    let par = h.parallel.tau_profile().map_err(runtime)?;
    let perp = h.perpendicular.tau_profile().map_err(runtime)?;
    for ((t, a), (_, b)) in par.iter().zip(&perp) {
        let _ = writeln!(tau, "{t:e},{a:e},{b:e}");
    }
    r.file("hom_tau.csv", tau);
    r.file("hom_parallel.csv", density_csv(&h.parallel));
    r.file("hom_perpendicular.csv", density_csv(&h.perpendicular));
    Ok(r)
}

fn scan(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let model = cfg.model()?;
    let table = visibility_scan(
        &model,
        &cfg.scan_settings(),
        &cfg.transit()?,
        &cfg.detection(),
        &cfg.initial()?,
    );
    if let Some(p) = table.points.iter().find(|p| p.error.is_some()) {
        return Err(CliError::Runtime(format!(
            "scan point ({} MHz, {} us): {}",
            rad_to_mhz(p.omega0),
            p.t_p * 1e6,
            p.error.as_deref().unwrap_or_default()
        )));
    }
    let mut r = Report::default();
    r.put("points", table.points.len());
    let flag = |v: Option<bool>| v.map_or(Value::Null, Value::Bool);
    r.headline
        .insert("v_decreasing_in_omega0".into(), flag(table.decreasing_in_omega0()));
    r.headline
        .insert("v_decreasing_in_tp".into(), flag(table.decreasing_in_t_p()));
    for p in &table.points {
        if let Some(c) = &p.conditional {
            if c.low_statistics() {
                r.warnings.push(format!(
                    "low statistics in conditionals at ({} MHz, {} us)",
                    rad_to_mhz(p.omega0),
                    p.t_p * 1e6
                ));
            }
        }
    }
    r.file("scan.csv", table.to_csv());
    Ok(r)
}
