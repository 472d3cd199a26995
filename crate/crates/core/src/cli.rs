//! The `tor-ratio` command line.
//!
//! Every command reads JSON (or JSONL for traces) and prints either a short
//! text report rounded to six decimals or, with `--json`, one JSON document at
//! full precision. Exit codes: 0 success, 2 invalid input, 3 divergence,
//! 1 anything else (I/O).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analytic::{mixture_rules, period_to_timeline, tor_mixture_time_composite, tor_period};
use crate::error::{Error, Result};
use crate::model::{FailureClass, FailureMixture, PeriodSpec, StageKind};
use crate::simulator::{
    deterministic_config, monte_carlo, realized_period_tor_check, simulate_replication,
    MonteCarloSummary, SimConfig,
};
use crate::timeline::{stage_breakdown, write_csv_rows, CsvRow, StageTotals};
use crate::trace::{self, parse_trace, write_jsonl, TraceEvent, TraceReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

pub const ANALYTIC_SCHEMA_VERSION: u32 = 1;
pub const COMPARE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "tor-ratio", version, about = "Training Overhead Ratio toolkit")]
pub struct Cli {
    /// Print one JSON document at full precision.
    #[arg(long, global = true)]
    pub json: bool,
    /// Print only the headline TOR.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form TOR of a period or a mixture config.
    Analytic(AnalyticArgs),
    /// Monte Carlo simulation of a SimConfig.
    Simulate(SimulateArgs),
    /// Report on a JSONL event trace.
    Trace(TraceArgs),
    /// Closed form against simulation for one period config.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    pub config: PathBuf,
    /// Also print the time-composite mixture TOR.
    #[arg(long)]
    pub composite: bool,
    /// Mixture rule used for the headline TOR.
    #[arg(long, default_value = "weighted")]
    pub mixture_rule: String,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub replications: u64,
    /// Write replication 0 as a JSONL trace.
    #[arg(long)]
    pub emit_trace: Option<PathBuf>,
    /// Write replication 0's timeline as CSV.
    #[arg(long)]
    pub emit_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    pub input: PathBuf,
    /// Export the reconstructed timeline as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub config: PathBuf,
    /// Defaults to 1 in deterministic mode and 1000 otherwise.
    #[arg(long)]
    pub replications: Option<u64>,
}

/// Config of `compare`: a period, and optionally the simulation to hold it
/// against. Without `simulation` the period is reproduced deterministically
/// `periods` times.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub period: PeriodSpec,
    #[serde(default = "default_periods")]
    pub periods: u64,
    #[serde(default)]
    pub simulation: Option<SimConfig>,
}

fn default_periods() -> u64 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub class: FailureClass,
    pub weight: f64,
    pub tor: f64,
    pub mtbf: f64,
    pub stage_breakdown: BTreeMap<StageKind, StageTotals>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub schema_version: u32,
    pub tor: f64,
    /// Mixture rule behind `tor`; absent for a single period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture_rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite_tor: Option<f64>,
    pub components: Vec<ComponentReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub deterministic: bool,
    pub replications: u64,
    pub analytic_tor: f64,
    pub simulated_tor: f64,
    pub std_error: f64,
    pub ci95: [f64; 2],
    pub realized_tor: Option<f64>,
    pub delta_simulated_analytic: f64,
    pub delta_simulated_realized: Option<f64>,
    pub delta_realized_analytic: Option<f64>,
    /// `|simulated - realized| <= 3 * std_error` (plus 1e-9 slack).
    pub within_3se: Option<bool>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_INPUT
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Diverged { .. } => EXIT_DIVERGED,
        Error::Io(_) => EXIT_FAILURE,
        _ => EXIT_INPUT,
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let fmt = Format {
        json: cli.json,
        quiet: cli.quiet,
    };
    match &cli.command {
        Command::Analytic(a) => {
            let r = analytic_report(&read_json(&a.config)?, &a.mixture_rule, a.composite)?;
            fmt.emit(out, &r, r.tor, |o| write_analytic(o, &r, a.composite))
        }
        Command::Simulate(a) => {
            let mut cfg: SimConfig = serde_json::from_value(read_json(&a.config)?)?;
            if let Some(seed) = a.seed {
                cfg.seed = seed;
            }
            let summary = simulate_command(&cfg, a)?;
            fmt.emit(out, &summary, summary.mean_tor, |o| write_summary(o, &summary))
        }
        Command::Trace(a) => {
            let events = parse_trace(BufReader::new(open(&a.input)?))?;
            let r = trace::report(&events)?;
            if let Some(path) = &a.csv {
                write_events_csv(&events, create(path)?)?;
            }
            fmt.emit(out, &r, r.tor, |o| write_trace(o, &r))
        }
        Command::Compare(a) => {
            let cfg: CompareConfig = serde_json::from_value(read_json(&a.config)?)?;
            let r = compare(&cfg, a.replications)?;
            fmt.emit(out, &r, r.simulated_tor, |o| write_compare(o, &r))
        }
    }
}

struct Format {
    json: bool,
    quiet: bool,
}

impl Format {
    fn emit<T: Serialize>(
        &self,
        out: &mut dyn Write,
        report: &T,
        headline: f64,
        text: impl FnOnce(&mut dyn Write) -> io::Result<()>,
    ) -> Result<()> {
        if self.json {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)?;
        } else if self.quiet {
            writeln!(out, "{}", f6(headline))?;
        } else {
            text(out)?;
        }
        Ok(())
    }
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn with_path(path: &Path, e: io::Error) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| with_path(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| with_path(path, e))
}

fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_reader(BufReader::new(open(path)?))?)
}

/// Closed-form report for a period or, when the document has `components`, a
/// mixture.
pub fn analytic_report(config: &Value, rule: &str, composite: bool) -> Result<AnalyticReport> {
    let component = |spec: &PeriodSpec, weight: f64| -> Result<ComponentReport> {
        Ok(ComponentReport {
            class: spec.class(),
            weight,
            tor: tor_period(spec)?.get(),
            mtbf: spec.mtbf().get(),
            stage_breakdown: stage_breakdown(&period_to_timeline(spec)),
        })
    };
    if config.get("components").is_some() {
        let mixture: FailureMixture = serde_json::from_value(config.clone())?;
        let rule = mixture_rules().get(rule)?;
        Ok(AnalyticReport {
            schema_version: ANALYTIC_SCHEMA_VERSION,
            tor: rule.combine(&mixture)?.get(),
            mixture_rule: Some(rule.name().to_owned()),
            composite_tor: if composite {
                Some(tor_mixture_time_composite(&mixture)?.get())
            } else {
                None
            },
            components: mixture
                .components()
                .iter()
                .map(|c| component(&c.spec, c.weight))
                .collect::<Result<_>>()?,
        })
    } else {
        let spec: PeriodSpec = serde_json::from_value(config.clone())?;
        let c = component(&spec, 1.0)?;
        Ok(AnalyticReport {
            schema_version: ANALYTIC_SCHEMA_VERSION,
            tor: c.tor,
            mixture_rule: None,
            composite_tor: composite.then_some(c.tor),
            components: vec![c],
        })
    }
}

fn simulate_command(cfg: &SimConfig, a: &SimulateArgs) -> Result<MonteCarloSummary> {
    let summary = monte_carlo(cfg, a.replications)?;
    if a.emit_trace.is_some() || a.emit_csv.is_some() {
        let first = simulate_replication(cfg, 0)?;
        if let Some(path) = &a.emit_trace {
            let mut w = create(path)?;
            write_jsonl(first.trace_events(), &mut w)?;
            w.flush()?;
        }
        if let Some(path) = &a.emit_csv {
            write_events_csv(first.trace_events(), create(path)?)?;
        }
    }
    Ok(summary)
}

fn write_events_csv(events: &[TraceEvent], out: impl Write) -> Result<()> {
    write_csv_rows(
        events.iter().map(|e| CsvRow {
            t_start: e.t_start.get(),
            t_end: e.t_end.get(),
            rate: e.rate.get(),
            stage: e.stage,
        }),
        out,
    )
}

/// Analytic TOR against the simulated mean and the closed form at realized
/// per-period means.
pub fn compare(cfg: &CompareConfig, replications: Option<u64>) -> Result<CompareReport> {
    let analytic = tor_period(&cfg.period)?.get();
    let deterministic = cfg.simulation.is_none();
    let sim = match &cfg.simulation {
        Some(s) => s.clone(),
        None => deterministic_config(&cfg.period, cfg.periods)?,
    };
    let replications = replications.unwrap_or(if deterministic { 1 } else { 1_000 });
    let summary = monte_carlo(&sim, replications)?;
    let realized = if deterministic {
        Some(realized_period_tor_check(&simulate_replication(&sim, 0)?)?.get())
    } else {
        summary.realized_tor
    };
    let simulated = summary.mean_tor;
    let d_sim_real = realized.map(|r| simulated - r);
    Ok(CompareReport {
        schema_version: COMPARE_SCHEMA_VERSION,
        deterministic,
        replications,
        analytic_tor: analytic,
        simulated_tor: simulated,
        std_error: summary.std_error,
        ci95: summary.ci95,
        realized_tor: realized,
        delta_simulated_analytic: simulated - analytic,
        delta_simulated_realized: d_sim_real,
        delta_realized_analytic: realized.map(|r| r - analytic),
        within_3se: d_sim_real.map(|d| d.abs() <= 3.0 * summary.std_error + 1e-9),
    })
}

fn write_breakdown(out: &mut dyn Write, b: &BTreeMap<StageKind, StageTotals>, indent: &str) -> io::Result<()> {
    for (stage, t) in b {
        writeln!(out, "{indent}{:<20} time {:>14}  lost {:>14}", stage.name(), f6(t.time), f6(t.lost_time))?;
    }
    Ok(())
}

fn write_analytic(out: &mut dyn Write, r: &AnalyticReport, composite: bool) -> io::Result<()> {
    writeln!(out, "tor: {}", f6(r.tor))?;
    if let Some(rule) = &r.mixture_rule {
        writeln!(out, "mixture rule: {rule}")?;
    }
    if composite {
        if let Some(c) = r.composite_tor {
            writeln!(out, "composite tor: {}", f6(c))?;
        }
    }
    let many = r.components.len() > 1;
    for (i, c) in r.components.iter().enumerate() {
        let indent = if many {
            writeln!(out, "component {i} ({}, weight {}): tor {}", c.class, c.weight, f6(c.tor))?;
            "  "
        } else {
            ""
        };
        writeln!(out, "{indent}mtbf: {}", f6(c.mtbf))?;
        writeln!(out, "{indent}stage breakdown:")?;
        write_breakdown(out, &c.stage_breakdown, &format!("{indent}  "))?;
    }
    Ok(())
}

fn write_summary(out: &mut dyn Write, s: &MonteCarloSummary) -> io::Result<()> {
    writeln!(out, "replications: {} ({} completed)", s.replications, s.completed)?;
    writeln!(out, "mean tor: {}", f6(s.mean_tor))?;
    writeln!(out, "stddev: {}", f6(s.stddev))?;
    writeln!(out, "95% ci: [{}, {}]", f6(s.ci95[0]), f6(s.ci95[1]))?;
    if let Some(r) = s.realized_tor {
        writeln!(out, "realized-mean closed form: {}", f6(r))?;
    }
    writeln!(out, "complete periods: {}", s.complete_periods)?;
    for d in &s.diverged {
        writeln!(
            out,
            "replication {} diverged: {} stalled periods at t = {}, committed work {}",
            d.replication,
            d.stalled_periods,
            f6(d.elapsed),
            d.committed_work
        )?;
    }
    Ok(())
}

fn write_trace(out: &mut dyn Write, r: &TraceReport) -> io::Result<()> {
    writeln!(out, "tor: {}", f6(r.tor))?;
    writeln!(out, "events: {}", r.events)?;
    writeln!(out, "observed time: {}", f6(r.observed_time))?;
    writeln!(out, "optimal time: {}", f6(r.optimal_time))?;
    let show = |m: Option<f64>| m.map_or_else(|| "n/a".to_owned(), f6);
    writeln!(out, "fail-stop mtbf: {} ({} periods)", show(r.mtbf.fail_stop_mtbf), r.periods.fail_stop)?;
    writeln!(out, "fail-slow mtbf: {} ({} periods)", show(r.mtbf.fail_slow_mtbf), r.periods.fail_slow)?;
    writeln!(out, "stage breakdown:")?;
    write_breakdown(out, &r.stage_breakdown, "  ")
}

fn write_compare(out: &mut dyn Write, r: &CompareReport) -> io::Result<()> {
    let show = |m: Option<f64>| m.map_or_else(|| "n/a".to_owned(), f6);
    writeln!(out, "mode: {}", if r.deterministic { "deterministic" } else { "stochastic" })?;
    writeln!(out, "replications: {}", r.replications)?;
    writeln!(out, "analytic tor: {}", f6(r.analytic_tor))?;
    writeln!(
        out,
        "simulated tor: {} +/- {} (95% ci [{}, {}])",
        f6(r.simulated_tor),
        f6(r.std_error),
        f6(r.ci95[0]),
        f6(r.ci95[1])
    )?;
    writeln!(out, "realized-mean closed form: {}", show(r.realized_tor))?;
    writeln!(out, "simulated - analytic: {}", f6(r.delta_simulated_analytic))?;
    writeln!(out, "simulated - realized: {}", show(r.delta_simulated_realized))?;
    writeln!(out, "realized - analytic: {}", show(r.delta_realized_analytic))?;
    if let Some(w) = r.within_3se {
        writeln!(out, "within 3 standard errors: {}", if w { "yes" } else { "no" })?;
    }
    Ok(())
}
