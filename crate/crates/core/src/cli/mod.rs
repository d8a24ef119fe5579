//! The `franson` command-line tool.
//!
//! Data goes to `--out` (or stdout); progress and errors go to stderr.
//! Exit codes: 0 success, 1 runtime error, 2 usage error, 3 a
//! `reproduce-paper` check failed.

mod reproduce;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::fringe::MIN_SCAN_POINTS;
use crate::analysis::report::{fringe_csv, summary_csv, Provenance, TOOL_VERSION};
use crate::analysis::{chsh_experiment, fit_fringe, scan_fringe, ChshReport, ScanAxis};
use crate::config::{load_config, parse_angle, parse_duration, ExperimentConfig, PairModel};
use crate::error::Error;
use crate::quantum::{ChshSettings, OutcomePair, Phase};
use crate::sim::{emit_event_stream, simulate_setting, write_records};

pub use reproduce::{reproduce_paper, Check, ReproduceReport, DEFAULT_PERIODS};

#[derive(Debug, Parser)]
#[command(
    name = "franson",
    version,
    about = "Franson interferometer simulator and Bell-test analysis"
)]
pub struct Cli {
    /// Experiment configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write data here instead of stdout, plus a `<out>.manifest.toml` sidecar.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Suppress progress messages.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count coincidences at one phase setting.
    Simulate(SimulateArgs),
    /// Scan a fringe and fit it.
    Scan(ScanArgs),
    /// Four-setting CHSH experiment.
    Chsh(ChshArgs),
    /// CHSH experiment with the local-hidden-variable source.
    Lhv(ChshArgs),
    /// Reproduce the headline fringe, accidental and significance numbers.
    ReproducePaper(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Phase of analyzer 1 (`0.25pi`, `45deg`, radians).
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub d1: f64,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub d2: f64,
    /// Acquisition time (`2s`, `500ms`).
    #[arg(long, default_value = "1s", value_parser = parse_duration)]
    pub dwell: f64,
    /// Also write the raw detector stream in binary form.
    #[arg(long, value_name = "PATH")]
    pub events: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutcomeArg {
    Pp,
    Pm,
    Mp,
    Mm,
}

impl From<OutcomeArg> for OutcomePair {
    fn from(o: OutcomeArg) -> Self {
        match o {
            OutcomeArg::Pp => OutcomePair::PP,
            OutcomeArg::Pm => OutcomePair::PM,
            OutcomeArg::Mp => OutcomePair::MP,
            OutcomeArg::Mm => OutcomePair::MM,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AxisArg {
    Mirror1,
    Phase2,
}

impl From<AxisArg> for ScanAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Mirror1 => ScanAxis::Mirror1,
            AxisArg::Phase2 => ScanAxis::Phase2,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum, default_value = "mirror1")]
    pub axis: AxisArg,
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    /// Fringe periods covered by the scan.
    #[arg(long, default_value_t = DEFAULT_PERIODS)]
    pub periods: f64,
    #[arg(long, default_value = "2s", value_parser = parse_duration)]
    pub dwell: f64,
    /// Output pair whose coincidences are recorded.
    #[arg(long, value_enum, default_value = "pp")]
    pub outcome: OutcomeArg,
}

#[derive(Debug, Args)]
pub struct ChshArgs {
    /// Acquisition time per setting.
    #[arg(long, default_value = "10s", value_parser = parse_duration)]
    pub dwell: f64,
    /// Emit JSON instead of key=value lines.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    #[arg(long, default_value = "2s", value_parser = parse_duration)]
    pub dwell: f64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(_) => 1,
            CliError::Usage(_) => 2,
            CliError::ChecksFailed(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "{e}"),
            CliError::ChecksFailed(n) => write!(f, "{n} reproduction check(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

/// Sidecar describing how an output file was produced.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub tool_version: &'a str,
    pub seed: u64,
    pub config_hash: String,
    pub output_path: String,
    pub config: &'a ExperimentConfig,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.toml");
    PathBuf::from(name)
}

struct Context {
    config: ExperimentConfig,
    seed: u64,
    out: Option<PathBuf>,
    quiet: bool,
}

impl Context {
    fn progress(&self, msg: impl fmt::Display) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }

    fn emit(&self, command: &str, data: &str) -> Result<(), CliError> {
        let Some(path) = &self.out else {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(data.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("writing stdout", e))?;
            return Ok(());
        };
        fs::write(path, data).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        let manifest = RunManifest {
            command,
            tool_version: TOOL_VERSION,
            seed: self.seed,
            config_hash: self.config.hash(),
            output_path: path.display().to_string(),
            config: &self.config,
        };
        let text = toml::to_string(&manifest).map_err(|e| Error::Format(e.to_string()))?;
        let side = manifest_path(path);
        fs::write(&side, text).map_err(|e| Error::io(format!("writing {}", side.display()), e))?;
        self.progress(format_args!("wrote {} and {}", path.display(), side.display()));
        Ok(())
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let seed = config.seed;
    let mut ctx = Context {
        config,
        seed,
        out: cli.out,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&ctx, &a),
        Command::Scan(a) => cmd_scan(&ctx, &a),
        Command::Chsh(a) => cmd_chsh(&ctx, &a, "chsh"),
        Command::Lhv(a) => {
            ctx.config.source.model = PairModel::Lhv;
            cmd_chsh(&ctx, &a, "lhv")
        }
        Command::ReproducePaper(a) => cmd_reproduce(&ctx, &a),
    }
}

fn check_dwell(dwell: f64) -> Result<(), CliError> {
    if dwell.is_finite() && dwell > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--dwell must be positive, got {dwell}")))
    }
}

fn check_points(points: usize) -> Result<(), CliError> {
    if points < MIN_SCAN_POINTS {
        Err(CliError::Usage(format!(
            "--points must be at least {MIN_SCAN_POINTS}, got {points}"
        )))
    } else {
        Ok(())
    }
}

fn cmd_simulate(ctx: &Context, a: &SimulateArgs) -> Result<(), CliError> {
    check_dwell(a.dwell)?;
    let (d1, d2) = (Phase(a.d1), Phase(a.d2));
    ctx.progress(format_args!("simulating {} s at d1={} d2={}", a.dwell, a.d1, a.d2));
    let summary = simulate_setting(&ctx.config, d1, d2, a.dwell, ctx.seed)?;
    if let Some(path) = &a.events {
        let events = emit_event_stream(&ctx.config, d1, d2, a.dwell, ctx.seed)?;
        let file = fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        write_records(io::BufWriter::new(file), &events)?;
        ctx.progress(format_args!("wrote {} events to {}", events.len(), path.display()));
    }
    let prov = Provenance::new("simulate", &ctx.config, ctx.seed, a.dwell);
    ctx.emit("simulate", &summary_csv(&summary, &prov, a.d1, a.d2))
}

fn cmd_scan(ctx: &Context, a: &ScanArgs) -> Result<(), CliError> {
    check_points(a.points)?;
    check_dwell(a.dwell)?;
    if !(a.periods.is_finite() && a.periods > 0.0) {
        return Err(CliError::Usage(format!(
            "--periods must be positive, got {}",
            a.periods
        )));
    }
    let axis = ScanAxis::from(a.axis);
    let controls = axis.controls(&ctx.config, a.points, a.periods);
    ctx.progress(format_args!(
        "scanning {} points x {} s along {}",
        a.points,
        a.dwell,
        axis.name()
    ));
    let points = scan_fringe(&ctx.config, axis, &controls, a.dwell, ctx.seed, a.outcome.into())?;
    match fit_fringe(&points, axis.period(&ctx.config)) {
        Ok(fit) => ctx.progress(format_args!(
            "fit: V={:.4}±{:.4} period={:.6e}±{:.2e} phase={:.4} chi2/dof={:.3}",
            fit.visibility_raw, fit.visibility_sigma, fit.period, fit.period_sigma, fit.phase0.0, fit.goodness
        )),
        Err(e) => ctx.progress(format_args!("fit failed: {e}")),
    }
    let prov = Provenance::new("scan", &ctx.config, ctx.seed, a.dwell);
    ctx.emit("scan", &fringe_csv(&points, &prov, axis.name()))
}

fn chsh_text(report: &ChshReport, prov: &Provenance, lhv: bool) -> String {
    let mut out = format!(
        "command={}\ntool_version={}\nconfig_hash={}\nsource_model={}\n",
        prov.command,
        TOOL_VERSION,
        prov.config_hash,
        if lhv { "lhv" } else { "quantum" }
    );
    out.push_str(&report.to_key_value());
    if lhv {
        let within = report.s <= 2.0 + 5.0 * report.s_sigma;
        out.push_str(&format!("within_local_bound_5sigma={within}\n"));
    }
    out
}

fn cmd_chsh(ctx: &Context, a: &ChshArgs, command: &str) -> Result<(), CliError> {
    check_dwell(a.dwell)?;
    let settings = ChshSettings::standard();
    ctx.progress(format_args!("running 4 settings x {} s", a.dwell));
    let report = chsh_experiment(&ctx.config, &settings, a.dwell, ctx.seed)?;
    let prov = Provenance::new(command, &ctx.config, ctx.seed, a.dwell);
    let lhv = ctx.config.source.model == PairModel::Lhv;
    let text = if a.json {
        let value = serde_json::json!({
            "command": command,
            "tool_version": TOOL_VERSION,
            "config_hash": prov.config_hash,
            "report": report,
        });
        let mut s = serde_json::to_string_pretty(&value).map_err(|e| Error::Format(e.to_string()))?;
        s.push('\n');
        s
    } else {
        chsh_text(&report, &prov, lhv)
    };
    ctx.emit(command, &text)
}

fn cmd_reproduce(ctx: &Context, a: &ReproduceArgs) -> Result<(), CliError> {
    check_points(a.points)?;
    check_dwell(a.dwell)?;
    ctx.progress(format_args!("scanning {} points x {} s", a.points, a.dwell));
    let report = reproduce_paper(&ctx.config, a.points, a.dwell, ctx.seed)?;
    let prov = Provenance::new("reproduce-paper", &ctx.config, ctx.seed, a.dwell);
    ctx.emit("reproduce-paper", &format!("{}{}", prov.header(), report.table()))?;
    match report.failures() {
        0 => Ok(()),
        n => Err(CliError::ChecksFailed(n)),
    }
}
