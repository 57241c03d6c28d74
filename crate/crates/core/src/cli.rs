//! The `pgs` command line: run, sweep, validate and demo.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{resolve_seed, SimConfig, SEED_ENV};
use crate::engagement::export::write_record_csv;
use crate::engagement::{compute_metrics, run_engagement, MetricsReport, TerminationReason};
use crate::error::{Error, Result};
use crate::guidance::LosSource;
use crate::montecarlo::{run_sweep, write_plot_csv, write_runs_csv, GroupStats};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "pgs",
    version,
    about = "Missile engagement simulator with seeker-delay compensation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one engagement and export its time history and metrics.
    Run(CommonArgs),
    /// Run the Monte-Carlo delay sweep.
    Sweep(CommonArgs),
    /// Check a configuration and print it fully resolved.
    Validate(CommonArgs),
    /// Compare zero-delay, delayed and predicted guidance on one scenario.
    Demo(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override a config value, e.g. `observer.epsilon=0.04`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "pgs_out")]
    pub out: PathBuf,
    /// Worker threads for `sweep` (default: all cores).
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Master seed; overrides the config file and PGS_SEED.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Run(a) | Command::Sweep(a) | Command::Validate(a) | Command::Demo(a) => a,
        }
    }
}

/// Parses `argv`, executes, and returns the process exit code.
pub fn main_with_args<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    match execute(&cli.command, env_seed.as_deref(), out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_)
        | Error::UnknownKey(_)
        | Error::NonHurwitzGains(..)
        | Error::InvalidParameter { .. }
        | Error::StepTooLarge { .. }
        | Error::Json(_)
        | Error::Dataset { .. } => EXIT_INVALID,
        Error::Divergence { .. } | Error::NonFinite(_) => EXIT_DIVERGED,
        _ => EXIT_FAILURE,
    }
}

/// Loads, overrides, seeds and validates the configuration.
pub fn load_config(args: &CommonArgs, env_seed: Option<&str>) -> Result<SimConfig> {
    let mut cfg = SimConfig::resolve(args.config.as_deref(), &args.set)?;
    cfg.seed = resolve_seed(cfg.seed, env_seed, args.seed)?;
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    Ok(cfg)
}

pub fn execute(cmd: &Command, env_seed: Option<&str>, out: &mut dyn Write) -> Result<i32> {
    let args = cmd.args();
    let cfg = load_config(args, env_seed)?;
    match cmd {
        Command::Validate(_) => {
            writeln!(out, "{}", cfg.to_json_pretty()?)?;
            Ok(EXIT_OK)
        }
        Command::Run(_) => cmd_run(&cfg, &args.out, out),
        Command::Sweep(_) => cmd_sweep(&cfg, &args.out, args.jobs, out),
        Command::Demo(_) => cmd_demo(&cfg, out),
    }
}

#[derive(Serialize)]
struct RunOutput<'a> {
    seed: u64,
    config: &'a SimConfig,
    metrics: &'a MetricsReport,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn cmd_run(cfg: &SimConfig, dir: &Path, out: &mut dyn Write) -> Result<i32> {
    let ec = cfg.engagement_config()?;
    let record = run_engagement(&ec)?;
    let metrics = compute_metrics(&record, &ec)?;
    fs::create_dir_all(dir)?;
    write_record_csv(&record, create(dir, "engagement.csv")?)?;
    let mut f = create(dir, "metrics.json")?;
    serde_json::to_writer_pretty(
        &mut f,
        &RunOutput {
            seed: cfg.seed,
            config: cfg,
            metrics: &metrics,
        },
    )?;
    f.flush()?;
    writeln!(
        out,
        "termination: {}\nmiss distance: {} m at t = {} s\noutputs: {}",
        metrics.termination_reason.as_str(),
        metrics.miss_distance,
        metrics.miss_time,
        dir.display()
    )?;
    for w in &metrics.warnings {
        writeln!(out, "warning: {w}")?;
    }
    if metrics.termination_reason == TerminationReason::ObserverDivergence {
        if let Some(d) = &metrics.diagnostic {
            writeln!(out, "diagnostic: {d}")?;
        }
        return Ok(EXIT_DIVERGED);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    seed: u64,
    std_kind: &'a str,
    total_runs: usize,
    failure_count: usize,
    groups: &'a [GroupStats],
    warnings: &'a [String],
    config: &'a SimConfig,
}

fn cmd_sweep(cfg: &SimConfig, dir: &Path, jobs: Option<usize>, out: &mut dyn Write) -> Result<i32> {
    let ec = cfg.engagement_config()?;
    let summary = run_sweep(&ec, &cfg.sweep_config(), jobs)?;
    fs::create_dir_all(dir)?;
    write_runs_csv(&summary, create(dir, "sweep_runs.csv")?)?;
    write_plot_csv(&summary, create(dir, "sweep_plotdata.csv")?)?;
    let mut f = create(dir, "sweep_summary.json")?;
    serde_json::to_writer_pretty(
        &mut f,
        &SweepOutput {
            seed: summary.master_seed,
            std_kind: &summary.std_kind,
            total_runs: summary.runs.len(),
            failure_count: summary.total_failures(),
            groups: &summary.groups,
            warnings: &summary.warnings,
            config: cfg,
        },
    )?;
    f.flush()?;
    writeln!(out, "{:>8}  {:>10}  {:>12}  {:>12}  {:>4}  {:>6}", "delay", "source", "mean_miss", "std_miss", "n", "failed")?;
    for g in &summary.groups {
        writeln!(
            out,
            "{:>8.4}  {:>10}  {:>12.5e}  {:>12.5e}  {:>4}  {:>6}",
            g.delay, g.source, g.mean_miss, g.std_miss, g.n, g.failure_count
        )?;
    }
    writeln!(out, "outputs: {}", dir.display())?;
    Ok(EXIT_OK)
}

/// One row of the demo comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct DemoRow {
    pub label: &'static str,
    pub source: LosSource,
    pub lag: f64,
    pub rmse: Option<f64>,
    pub miss: f64,
    pub termination: TerminationReason,
}

/// Zero-delay true LOS rate, delayed uncorrected, delayed corrected.
pub fn demo_rows(cfg: &SimConfig) -> Result<Vec<DemoRow>> {
    let base = cfg.engagement_config()?;
    let lag = cfg.seeker.lag_time_constant;
    let cases = [
        ("zero delay", LosSource::True, 0.0),
        ("delayed", LosSource::Delayed, lag),
        ("observer", LosSource::Predicted, lag),
    ];
    let mut rows = Vec::new();
    for (label, source, l) in cases {
        let mut ec = base.clone().with_source(source);
        if l != lag {
            ec = ec.with_lag(l)?;
        }
        let rec = run_engagement(&ec)?;
        let m = compute_metrics(&rec, &ec)?;
        rows.push(DemoRow {
            label,
            source,
            lag: l,
            rmse: match source {
                LosSource::True => None,
                LosSource::Delayed => m.rmse_delayed,
                LosSource::Predicted => m.rmse_predicted,
            },
            miss: m.miss_distance,
            termination: m.termination_reason,
        });
    }
    Ok(rows)
}

fn cmd_demo(cfg: &SimConfig, out: &mut dyn Write) -> Result<i32> {
    let rows = demo_rows(cfg)?;
    writeln!(out, "{:<12}  {:>6}  {:>16}  {:>14}  termination", "scenario", "lag_s", "los_rate_rmse", "miss_m")?;
    for r in &rows {
        let rmse = r.rmse.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:<12}  {:>6.3}  {:>16}  {:>14.6e}  {}",
            r.label,
            r.lag,
            rmse,
            r.miss,
            r.termination.as_str()
        )?;
    }
    if rows[1].miss > 0.0 {
        writeln!(
            out,
            "miss reduction with observer: {:.1}%",
            100.0 * (1.0 - rows[2].miss / rows[1].miss)
        )?;
    }
    if let (Some(d), Some(p)) = (rows[1].rmse, rows[2].rmse) {
        if p > 0.0 {
            writeln!(out, "LOS-rate RMSE ratio delayed/observer: {:.2}", d / p)?;
        }
    }
    Ok(EXIT_OK)
}
