//! Command-line front end. Every subcommand builds a [`Report`] that renders
//! either as pretty JSON or as a CSV table.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 validation error
//! (including malformed arguments). Errors are reported on stderr as a
//! single JSON object.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::analog::{apply_droop, vdac_ramp, LeakageModel, SigmaDeltaSequencer};
use crate::config::{ConfigError, GlobalConfig};
use crate::noise::{detector_noise_budget, injector_noise_budget, spectra, NoiseBudget};
use crate::patgen::{self, assemble, decode, scripts, MemoryImage, PatternProgram};
use crate::pulsegen::{apply_jitter, generate_phases, pulse_select, Combine, JitterModel, PulseSelectConfig};
use crate::qexp::{
    autocorrelation, bias_scan, charging_energy, charging_to_thermal_ratio, divider_map,
    extract_probabilities, histogram, linspace, run_trials, step_sweep, HistogramResult, Outcome,
};
use crate::thermal::scaling_study;
use crate::timeline::SignalTimeline;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Validation(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Validation(_) => "validation",
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file; built-in defaults when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "cryoqc", version, about = "Cryogenic quantum-controller digital twin")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Figure {
    #[value(name = "4f")]
    F4f,
    #[value(name = "5g")]
    F5g,
    #[value(name = "6d")]
    F6d,
    #[value(name = "7d")]
    F7d,
    #[value(name = "8c")]
    F8c,
    #[value(name = "8d")]
    F8d,
    #[value(name = "8e")]
    F8e,
    #[value(name = "9")]
    F9,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CombineArg {
    And,
    Or,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Assemble a script into a pattern-memory image.
    Assemble {
        /// Script file, or a bundled script name (script1_pulse_x, ..., or 1-4).
        script: String,
        /// Also write the raw 4096-byte image here.
        #[arg(long, value_name = "PATH")]
        image: Option<PathBuf>,
    },
    /// Decode a raw pattern-memory image back into a script.
    Disassemble {
        image: PathBuf,
    },
    /// Memory budget per script (the bundled scripts by default).
    Budget {
        scripts: Vec<String>,
    },
    /// Johnson-counter phase edges.
    Phases {
        #[arg(long)]
        clk_hz: Option<f64>,
        #[arg(long)]
        duration_s: Option<f64>,
    },
    /// Pulse-select output for a pair of phases.
    Pulse {
        #[arg(long)]
        sel1: Option<u8>,
        #[arg(long)]
        sel2: Option<u8>,
        #[arg(long, value_enum)]
        combine: Option<CombineArg>,
        #[arg(long)]
        leaf: Option<u8>,
        #[arg(long)]
        jitter_rms_s: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Coarse/fine VDAC ramp to a target voltage, then hold droop.
    VdacRamp {
        #[arg(long)]
        target_v: Option<f64>,
    },
    /// Injector output noise budget.
    NoiseInjector {
        /// Emit per-source output PSDs instead of the budget.
        #[arg(long)]
        spectrum: bool,
    },
    /// Detector output noise budget.
    NoiseDetector {
        /// Emit per-source output PSDs instead of the budget.
        #[arg(long)]
        spectrum: bool,
    },
    /// Heat load at the cold stage.
    Thermal,
    /// Heat load versus system scale.
    ThermalScale {
        /// Comma-separated scale multipliers.
        #[arg(long, value_delimiter = ',')]
        multipliers: Option<Vec<f64>>,
    },
    /// Tunneling experiment at one injector step.
    Experiment {
        #[arg(long)]
        step_v: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Emit the histogram instead of the trial series (CSV only).
        #[arg(long)]
        histogram: bool,
    },
    /// Mean detector output over the (V_RD, V_RG) grid.
    BiasScan {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Autocorrelation of a trial series.
    Acf {
        /// CSV with a `v_out_v` column; a fresh experiment run when absent.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        #[arg(long)]
        max_lag: Option<usize>,
        #[arg(long)]
        step_v: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the effective configuration.
    Config,
    /// Canned scenario for one figure of the reference measurements.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

/// Rendered result of one subcommand.
pub struct Report {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    fn new(json: Value, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Self {
            json,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }

    /// Key/value table built from a flat JSON object.
    fn flat(json: Value) -> Self {
        let rows = match &json {
            Value::Object(m) => m
                .iter()
                .filter(|(_, v)| !v.is_object() && !v.is_array())
                .map(|(k, v)| vec![k.clone(), plain(v)])
                .collect(),
            _ => Vec::new(),
        };
        Self::new(json, &["key", "value"], rows)
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).map_err(invalid)?;
                s.push('\n');
                Ok(s.into_bytes())
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header).map_err(invalid)?;
                for r in &self.rows {
                    w.write_record(r).map_err(invalid)?;
                }
                w.into_inner().map_err(invalid)
            }
        }
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn to_json(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report data serializes")
}

fn num(x: f64) -> String {
    x.to_string()
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if !e.use_stderr() {
                let _ = stdout.write_all(text.as_bytes());
                return 0;
            }
            let body = json!({"error": "usage", "message": text.trim_end(), "exit_code": 2});
            let _ = writeln!(stderr, "{body}");
            return 2;
        }
    };
    match execute(&cli) {
        Ok(bytes) => {
            let written = match &cli.common.out {
                Some(p) => std::fs::write(p, &bytes).map_err(|e| io_err(p, e)),
                None => stdout.write_all(&bytes).map_err(|e| CliError::Config(e.to_string())),
            };
            match written {
                Ok(()) => 0,
                Err(e) => report_error(&e, stderr),
            }
        }
        Err(e) => report_error(&e, stderr),
    }
}

fn report_error(e: &CliError, stderr: &mut dyn Write) -> i32 {
    let body = json!({"error": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()});
    let _ = writeln!(stderr, "{body}");
    e.exit_code()
}

fn execute(cli: &Cli) -> Result<Vec<u8>, CliError> {
    let cfg = match &cli.common.config {
        Some(p) => GlobalConfig::load(p)?,
        None => GlobalConfig::default(),
    };
    let report = dispatch(&cli.command, &cfg, cli.common.format)?;
    report.render(cli.common.format)
}

fn dispatch(cmd: &Command, cfg: &GlobalConfig, format: Format) -> Result<Report, CliError> {
    match cmd {
        Command::Assemble { script, image } => cmd_assemble(cfg, script, image.as_deref()),
        Command::Disassemble { image } => cmd_disassemble(cfg, image),
        Command::Budget { scripts } => cmd_budget(cfg, scripts),
        Command::Phases { clk_hz, duration_s } => {
            let tl = generate_phases(
                clk_hz.unwrap_or(cfg.pulsegen.clk_hz),
                duration_s.unwrap_or(cfg.pulsegen.duration_s),
            )
            .map_err(invalid)?;
            Ok(timeline_report(&tl))
        }
        Command::Pulse {
            sel1,
            sel2,
            combine,
            leaf,
            jitter_rms_s,
            seed,
        } => {
            let p = &cfg.pulsegen;
            let combine = match combine {
                Some(CombineArg::And) => Combine::And,
                Some(CombineArg::Or) => Combine::Or,
                None => p.combine,
            };
            let sel = PulseSelectConfig::new(
                sel1.unwrap_or(p.sel1),
                sel2.unwrap_or(p.sel2),
                combine,
                leaf.unwrap_or(p.leaf_index),
            )
            .map_err(invalid)?;
            let phases = generate_phases(p.clk_hz, p.duration_s).map_err(invalid)?;
            let out = pulse_select(&sel, &phases);
            let jm = JitterModel {
                rms_s: jitter_rms_s.unwrap_or(p.jitter_rms_s),
                seed: seed.unwrap_or(p.seed),
            };
            let out = apply_jitter(&out, &jm).map_err(invalid)?;
            let mut r = timeline_report(&out);
            let widths: Vec<f64> = out
                .high_intervals(&sel.output_name())
                .iter()
                .filter(|(a, b)| b.is_finite() && *a >= 0.0)
                .map(|(a, b)| b - a)
                .collect();
            r.json = json!({"output": sel.output_name(), "widths_s": widths, "timeline": r.json});
            Ok(r)
        }
        Command::VdacRamp { target_v } => cmd_vdac(cfg, target_v.unwrap_or(cfg.analog.ramp_target_v)),
        Command::NoiseInjector { spectrum } => {
            let p = &cfg.noise.injector;
            if *spectrum {
                let grid = p.grid().map_err(invalid)?;
                Ok(spectrum_report(&spectra(&p.paths().map_err(invalid)?, &grid)))
            } else {
                Ok(budget_report(&injector_noise_budget(p).map_err(invalid)?))
            }
        }
        Command::NoiseDetector { spectrum } => {
            let p = &cfg.noise.detector;
            if *spectrum {
                let grid = p.grid().map_err(invalid)?;
                Ok(spectrum_report(&spectra(&p.paths().map_err(invalid)?, &grid)))
            } else {
                Ok(budget_report(&detector_noise_budget(p).map_err(invalid)?))
            }
        }
        Command::Thermal => {
            let table = cfg.thermal.table()?;
            let rep = cfg.thermal.scenario.report(&table).map_err(invalid)?;
            Ok(Report::flat(to_json(rep)))
        }
        Command::ThermalScale { multipliers } => {
            let m = multipliers.clone().unwrap_or_else(|| cfg.thermal.multipliers.clone());
            thermal_scale(cfg, &m)
        }
        Command::Experiment {
            step_v,
            trials,
            seed,
            histogram,
        } => cmd_experiment(
            cfg,
            step_v.unwrap_or(cfg.qexp.step_v),
            trials.unwrap_or(cfg.qexp.trials),
            seed.unwrap_or(cfg.qexp.seed),
            *histogram && format == Format::Csv,
        ),
        Command::BiasScan { trials, seed } => {
            let mut sc = cfg.qexp.bias_scan.clone();
            sc.trials_per_point = trials.unwrap_or(sc.trials_per_point);
            sc.seed = seed.unwrap_or(sc.seed);
            let map = bias_scan(&sc, &cfg.qexp.model, &cfg.detector, &cfg.qexp.histogram)
                .map_err(invalid)?;
            let rows = map
                .points
                .iter()
                .map(|p| {
                    vec![
                        num(p.v_rd_v),
                        num(p.v_rg_v),
                        p.in_window.to_string(),
                        num(p.mean_v),
                        num(p.p1),
                        num(p.dip),
                        p.bimodal.to_string(),
                    ]
                })
                .collect();
            Ok(Report::new(
                to_json(&map),
                &["v_rd_v", "v_rg_v", "in_window", "mean_v", "p1", "dip", "bimodal"],
                rows,
            ))
        }
        Command::Acf {
            input,
            max_lag,
            step_v,
            trials,
            seed,
        } => {
            let series = match input {
                Some(p) => read_series(p)?,
                None => run_trials(
                    &cfg.qexp.model,
                    &cfg.detector,
                    step_v.unwrap_or(cfg.qexp.step_v),
                    trials.unwrap_or(cfg.qexp.trials),
                    seed.unwrap_or(cfg.qexp.seed),
                )
                .map_err(invalid)?
                .series(),
            };
            acf_report(&series, max_lag.unwrap_or(cfg.qexp.acf_max_lag))
        }
        Command::Config => Ok(Report::flat(to_json(cfg))),
        Command::Reproduce { figure } => reproduce(cfg, *figure),
    }
}

fn resolve_script(cfg: &GlobalConfig, s: &str) -> Result<(String, PatternProgram), CliError> {
    let bundled = scripts::all();
    let hit = bundled
        .iter()
        .enumerate()
        .find(|(i, (name, _))| *name == s || (i + 1).to_string() == s);
    let (name, text) = match hit {
        Some((_, (name, src))) => (name.to_string(), src.to_string()),
        None => {
            let p = Path::new(s);
            let text = std::fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            let name = p.file_stem().map_or(s.to_string(), |n| n.to_string_lossy().into());
            (name, text)
        }
    };
    let prog = patgen::parse_script(&text, &cfg.patgen.node_table).map_err(invalid)?;
    Ok((name, prog))
}

fn cmd_assemble(cfg: &GlobalConfig, script: &str, image: Option<&Path>) -> Result<Report, CliError> {
    let (name, prog) = resolve_script(cfg, script)?;
    let img = assemble(&prog).map_err(invalid)?;
    if let Some(p) = image {
        std::fs::write(p, img.to_bytes()).map_err(|e| io_err(p, e))?;
    }
    let hex: Vec<String> = img.words[..img.used_vectors]
        .iter()
        .map(|w| format!("{w:016x}"))
        .collect();
    let row = patgen::budget(&name, &prog);
    let rows = hex
        .iter()
        .enumerate()
        .map(|(i, h)| vec![(i + 1).to_string(), h.clone()])
        .collect();
    Ok(Report::new(
        json!({"budget": row, "words_hex": hex}),
        &["vector", "word_hex"],
        rows,
    ))
}

fn cmd_disassemble(cfg: &GlobalConfig, path: &Path) -> Result<Report, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let img = MemoryImage::from_bytes(&bytes).map_err(invalid)?;
    let prog = decode(&img, &cfg.patgen.node_table).map_err(invalid)?;
    let lines: Vec<String> = prog.vectors.iter().map(|v| v.to_script_line()).collect();
    let rows = lines
        .iter()
        .enumerate()
        .map(|(i, l)| vec![(i + 1).to_string(), l.clone()])
        .collect();
    Ok(Report::new(
        json!({"vectors": prog.len(), "script": prog.to_script()}),
        &["vector", "instruction"],
        rows,
    ))
}

fn cmd_budget(cfg: &GlobalConfig, names: &[String]) -> Result<Report, CliError> {
    let names: Vec<String> = if names.is_empty() {
        scripts::all().iter().map(|(n, _)| n.to_string()).collect()
    } else {
        names.to_vec()
    };
    let mut table = Vec::new();
    for n in &names {
        let (name, prog) = resolve_script(cfg, n)?;
        table.push(patgen::budget(&name, &prog));
    }
    let rows = table
        .iter()
        .map(|b| {
            vec![
                b.name.clone(),
                b.vectors.to_string(),
                b.utilization_bits.to_string(),
                b.capacity_bits.to_string(),
            ]
        })
        .collect();
    Ok(Report::new(
        to_json(&table),
        &["script", "vectors", "utilization_bits", "capacity_bits"],
        rows,
    ))
}

fn timeline_report(tl: &SignalTimeline) -> Report {
    let rows = tl
        .edges
        .iter()
        .map(|e| vec![num(e.time_s), e.signal.clone(), e.level.to_string()])
        .collect();
    Report::new(to_json(tl), &["time_s", "signal", "level"], rows)
}

fn cmd_vdac(cfg: &GlobalConfig, target_v: f64) -> Result<Report, CliError> {
    let a = &cfg.analog;
    let seq = SigmaDeltaSequencer::new(a.sequencer_code, a.sequencer_clk_hz, a.sequencer_pulse_width_s)
        .map_err(invalid)?;
    let ramp = vdac_ramp(a.coarse, a.fine, &seq, &a.limits, target_v).map_err(invalid)?;
    let lm = LeakageModel {
        droop_rate_v_per_s: a.droop_rate_v_per_s,
        ..LeakageModel::default()
    };
    let held = apply_droop(ramp.final_v, a.hold_s, &lm).map_err(invalid)?;
    let rows = ramp
        .trajectory
        .iter()
        .map(|(t, v)| vec![num(*t), num(*v)])
        .collect();
    Ok(Report::new(
        json!({
            "target_v": target_v,
            "final_v": ramp.final_v,
            "settle_time_s": ramp.settle_time_s,
            "coarse_transfers": ramp.coarse_transfers,
            "fine_transfers": ramp.fine_transfers,
            "hold_s": a.hold_s,
            "held_v": held,
            "droop_v": ramp.final_v - held,
            "trajectory": ramp.trajectory,
        }),
        &["time_s", "v_out_v"],
        rows,
    ))
}

fn budget_report(b: &NoiseBudget) -> Report {
    let mut rows: Vec<Vec<String>> = b
        .rows
        .iter()
        .map(|r| vec![r.source.clone(), num(r.rms_v)])
        .collect();
    rows.push(vec!["total".into(), num(b.total_rms_v)]);
    Report::new(to_json(b), &["source", "rms_v"], rows)
}

fn spectrum_report(s: &[(f64, String, f64)]) -> Report {
    let rows = s
        .iter()
        .map(|(f, src, p)| vec![num(*f), src.clone(), num(*p)])
        .collect();
    let json = Value::Array(
        s.iter()
            .map(|(f, src, p)| json!({"f_hz": f, "source": src, "psd_v2_hz": p}))
            .collect(),
    );
    Report::new(json, &["f_hz", "source", "psd_v2_hz"], rows)
}

fn thermal_scale(cfg: &GlobalConfig, m: &[f64]) -> Result<Report, CliError> {
    let table = cfg.thermal.table()?;
    let pts = scaling_study(&cfg.thermal.scenario, &table, m).map_err(invalid)?;
    let rows = pts
        .iter()
        .map(|p| {
            vec![
                num(p.multiplier),
                p.detectors.to_string(),
                p.signal_wires.to_string(),
                p.n_wires.to_string(),
                num(p.report.total_w),
                num(p.report.fraction_of_budget),
            ]
        })
        .collect();
    Ok(Report::new(
        to_json(&pts),
        &["multiplier", "detectors", "signal_wires", "n_wires", "total_w", "fraction_of_budget"],
        rows,
    ))
}

fn outcome_label(o: &Outcome) -> &'static str {
    match o {
        Outcome::Zero => "0",
        Outcome::One => "1",
        Outcome::Midzone { .. } => "mid",
    }
}

fn histogram_report(h: &HistogramResult, extra: Value) -> Report {
    let rows = h
        .counts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            vec![
                num(0.5 * (h.bin_edges_v[i] + h.bin_edges_v[i + 1])),
                c.to_string(),
            ]
        })
        .collect();
    let mut json = extra;
    json["histogram"] = to_json(h);
    Report::new(json, &["bin_center_v", "count"], rows)
}

fn cmd_experiment(
    cfg: &GlobalConfig,
    step_v: f64,
    trials: usize,
    seed: u64,
    hist_csv: bool,
) -> Result<Report, CliError> {
    let q = &cfg.qexp;
    let r = run_trials(&q.model, &cfg.detector, step_v, trials, seed).map_err(invalid)?;
    let series = r.series();
    let h = histogram(&series, &q.histogram).map_err(invalid)?;
    let p = extract_probabilities(&series, &q.histogram, r.level1_v).map_err(invalid)?;
    let summary = json!({
        "step_v": step_v,
        "trials": trials,
        "seed": seed,
        "p_model": r.p_model,
        "level1_v": r.level1_v,
        "probabilities": p,
        "peak_separation_v": h.peak0_v - h.peak1_v,
    });
    if hist_csv {
        return Ok(histogram_report(&h, summary));
    }
    let rows = r
        .samples
        .iter()
        .zip(&r.outcomes)
        .map(|(s, o)| vec![s.trial_id.to_string(), outcome_label(o).into(), num(s.v_out_v)])
        .collect();
    let mut json = summary;
    json["histogram"] = to_json(&h);
    Ok(Report::new(json, &["trial_id", "outcome", "v_out_v"], rows))
}

fn read_series(path: &Path) -> Result<Vec<f64>, CliError> {
    #[derive(serde::Deserialize)]
    struct Row {
        v_out_v: f64,
    }
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    rdr.deserialize::<Row>()
        .map(|r| r.map(|r| r.v_out_v).map_err(invalid))
        .collect()
}

fn acf_report(series: &[f64], max_lag: usize) -> Result<Report, CliError> {
    let acf = autocorrelation(series, max_lag).map_err(invalid)?;
    let rows = acf
        .iter()
        .enumerate()
        .map(|(k, a)| vec![k.to_string(), num(*a)])
        .collect();
    Ok(Report::new(
        json!({"n": series.len(), "acf": acf}),
        &["lag", "acf"],
        rows,
    ))
}

fn reproduce(cfg: &GlobalConfig, fig: Figure) -> Result<Report, CliError> {
    let q = &cfg.qexp;
    match fig {
        Figure::F4f => Ok(budget_report(
            &injector_noise_budget(&cfg.noise.injector).map_err(invalid)?,
        )),
        Figure::F5g => Ok(budget_report(
            &detector_noise_budget(&cfg.noise.detector).map_err(invalid)?,
        )),
        Figure::F6d => cmd_budget(cfg, &[]),
        Figure::F7d => cmd_vdac(cfg, cfg.analog.ramp_target_v),
        Figure::F8c | Figure::F8d => {
            let r = run_trials(&q.model, &cfg.detector, q.step_v, q.trials, q.seed).map_err(invalid)?;
            let series = r.series();
            let h = histogram(&series, &q.histogram).map_err(invalid)?;
            let p = extract_probabilities(&series, &q.histogram, r.level1_v).map_err(invalid)?;
            let mut extra = json!({"step_v": q.step_v, "probabilities": p});
            if fig == Figure::F8d {
                extra["acf"] = to_json(autocorrelation(&series, q.acf_max_lag).map_err(invalid)?);
            }
            Ok(histogram_report(&h, extra))
        }
        Figure::F8e => {
            let steps = linspace(q.sweep_start_v, q.sweep_stop_v, q.sweep_points);
            let pts = step_sweep(&q.model, &cfg.detector, &steps, q.trials, q.seed, &q.histogram)
                .map_err(invalid)?;
            let ce = charging_energy(q.c_dot_f).map_err(invalid)?;
            let rows = pts
                .iter()
                .map(|p| {
                    vec![
                        num(p.step_v),
                        num(p.p_model),
                        num(p.p0),
                        num(p.p1),
                        p.discarded.to_string(),
                    ]
                })
                .collect();
            Ok(Report::new(
                json!({
                    "sweep": pts,
                    "charging_energy_ev": ce.delta_e_ev,
                    "charging_to_kt": charging_to_thermal_ratio(ce.delta_e_j, cfg.noise.detector.temp_k),
                    "junction_swing_v": divider_map(q.gate_swing_v, q.model.divider_ratio).map_err(invalid)?,
                }),
                &["step_v", "p_model", "p0", "p1", "discarded"],
                rows,
            ))
        }
        Figure::F9 => {
            let table = cfg.thermal.table()?;
            let base = cfg.thermal.scenario.report(&table).map_err(invalid)?;
            let mut r = thermal_scale(cfg, &cfg.thermal.multipliers)?;
            r.json = json!({"base": base, "scaling": r.json});
            Ok(r)
        }
    }
}
