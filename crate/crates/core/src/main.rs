//! Command-line front end: executes run/sweep configs or named presets,
//! renders figures, and drives the stationarity translation procedures.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error (clap uses
//! the same code for usage errors), 3 numeric failure (divergence,
//! non-convergence, non-finite values).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use saddlebench::harness::config::{self, ProblemConfig, RunConfig, SweepConfig};
use saddlebench::harness::presets::{self, PresetKind};
use saddlebench::harness::trace::provenance_header;
use saddlebench::harness::{plot, run, sweep, PlotSpec};
use saddlebench::rng::{RngStream, StreamId};
use saddlebench::{convert, Error};

#[derive(Parser)]
#[command(
    name = "saddlebench",
    version,
    about = "Benchmark harness for single-loop smoothed alternating gradient methods \
             on nonconvex-PL saddle problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Path to a TOML config file.
    config: Option<PathBuf>,
    /// Name of a shipped preset (see `list-presets`).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one experiment and write its trace CSV.
    Run {
        #[command(flatten)]
        source: Source,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the metric sampling cadence.
        #[arg(long)]
        cadence: Option<u64>,
        /// Override the iteration horizon.
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Execute a stepsize grid sweep and write cell/summary CSVs.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Override the base seed the per-cell seeds derive from.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output base path (`_cells.csv`/`_summary.csv` are appended).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render trace CSVs into a self-contained SVG figure.
    Plot {
        #[command(flatten)]
        source: Source,
        /// Override the image output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Translate a point between the two stationarity notions.
    Convert {
        #[command(subcommand)]
        direction: ConvertDirection,
    },
    /// List the shipped presets.
    ListPresets,
}

#[derive(Subcommand)]
enum ConvertDirection {
    /// From a primal-stationary point to a stationary point of f
    /// (runs gradient ascent on y; config needs `eps` and `eps_prime`).
    ToF { config: PathBuf },
    /// From a stationary point of f to a primal-stationary point
    /// (runs an anchored inner solve; config needs `eps`).
    ToPhi { config: PathBuf },
}

/// Input for `convert to-f` / `convert to-phi`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvertConfig {
    problem: ProblemConfig,
    x: Vec<f64>,
    y: Vec<f64>,
    eps: f64,
    /// Stationarity level of the incoming y (to-f only).
    #[serde(default)]
    eps_prime: Option<f64>,
    /// Use the sampled oracle for the dynamics (certificates stay exact).
    #[serde(default)]
    stochastic: bool,
    #[serde(default)]
    budget: Option<u64>,
    #[serde(default)]
    seed: u64,
}

/// Flat, serializable view of a translation result.
#[derive(Serialize)]
struct ConvertReport {
    x: Vec<f64>,
    y: Vec<f64>,
    iterations: u64,
    oracle_calls: u64,
    grad_f_x_norm: f64,
    grad_f_y_norm: f64,
    eps_pair: (f64, f64),
    grad_phi_norm: Option<f64>,
    grad_phi_exact: Option<bool>,
    warnings: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

fn exit_for(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) | Error::ClosedFormUnavailable { .. } => ExitCode::from(2),
        Error::Io(_) => ExitCode::from(1),
        _ => ExitCode::from(3),
    }
}

fn dispatch(cli: Cli) -> saddlebench::Result<ExitCode> {
    match cli.command {
        Command::Run { source, seed, out, cadence, horizon } => {
            let (mut config, default_out) = load_run(&source)?;
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(c) = cadence {
                config.cadence = c;
            }
            if let Some(h) = horizon {
                config.horizon = h;
            }
            if let Some(o) = out {
                config.output = Some(o);
            }
            let out_path = config.output.clone().unwrap_or(default_out);
            let outcome = run::run_config(&config)?;
            // The embedded config describes how to reproduce the rows; the
            // destination path is not part of that, and recording it would
            // make otherwise-identical runs differ byte-wise.
            let header_cfg = {
                let mut c = config.clone();
                c.output = None;
                c
            };
            saddlebench::harness::trace::write_trace(
                &out_path,
                &outcome.trace,
                &provenance_header("run", &header_cfg),
            )?;
            let last = outcome.trace.rows.last();
            println!(
                "wrote {} ({} rows, {} iterations, {} oracle calls)",
                out_path.display(),
                outcome.trace.rows.len(),
                last.map(|r| r.iter).unwrap_or(0),
                outcome.oracle_calls,
            );
            if let Some(detail) = &outcome.trace.diverged {
                eprintln!("run diverged: {detail}");
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { source, seed, out } => {
            let (mut config, default_out) = load_sweep(&source)?;
            if let Some(s) = seed {
                config.base.seed = s;
            }
            if let Some(o) = out {
                config.output = Some(o);
            }
            if config.output.is_none() {
                config.output = Some(default_out);
            }
            let outcome = sweep::run_sweep(&config)?;
            let base = config.output.as_ref().expect("set above");
            println!(
                "wrote {} and {} ({} cells x {} seeds)",
                sweep::cells_path(base).display(),
                sweep::summary_path(base).display(),
                outcome.summaries.len(),
                config.seeds,
            );
            report_best_cells(&outcome);
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { source, out } => {
            let mut spec = load_plot(&source)?;
            if let Some(o) = out {
                spec.out = o;
            }
            let path = plot::render_to_file(&spec)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Convert { direction } => {
            let report = match &direction {
                ConvertDirection::ToF { config } => run_convert(config, true)?,
                ConvertDirection::ToPhi { config } => run_convert(config, false)?,
            };
            let text = toml::to_string(&report)
                .map_err(|e| Error::Config(format!("serializing report: {e}")))?;
            print!("{text}");
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListPresets => {
            let presets = presets::all();
            let width = presets.iter().map(|p| p.name.len()).max().unwrap_or(0);
            for p in presets {
                println!("{:width$}  {:5}  {}", p.name, p.kind.label(), p.summary);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn report_best_cells(outcome: &sweep::SweepOutcome) {
    if let Some(best) = outcome.best_cell_by_median() {
        println!(
            "best median iterations-to-threshold: cell {} (tau1={}, tau2={}) = {} over {} hits",
            best.cell_index,
            best.params.tau1,
            best.params.tau2,
            best.median_iters.unwrap_or(f64::NAN),
            best.hit_count,
        );
    } else if let Some((ci, col, v)) = best_final(outcome) {
        println!(
            "best mean final {col}: cell {ci} (tau1={}, tau2={}) = {v}",
            outcome.summaries[ci].params.tau1, outcome.summaries[ci].params.tau2,
        );
    }
}

/// Best cell by mean final value of the first column when no threshold
/// clock ran.
fn best_final(outcome: &sweep::SweepOutcome) -> Option<(usize, &str, f64)> {
    let col = outcome.columns.first()?;
    outcome
        .summaries
        .iter()
        .filter_map(|s| s.mean_final.first().copied().flatten().map(|v| (s.cell_index, v)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(ci, v)| (ci, col.as_str(), v))
}

fn stem_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

fn load_run(source: &Source) -> saddlebench::Result<(RunConfig, PathBuf)> {
    match (&source.config, &source.preset) {
        (Some(path), None) => {
            let cfg = RunConfig::from_path(path)?;
            Ok((cfg, PathBuf::from(format!("{}.csv", stem_of(path)))))
        }
        (None, Some(name)) => match presets::by_name(name) {
            Some(p) => match p.kind {
                PresetKind::Run(cfg) => Ok((cfg, PathBuf::from(format!("{name}.csv")))),
                other => Err(Error::Config(format!(
                    "preset `{name}` is a {} preset; use the matching subcommand",
                    other.label()
                ))),
            },
            None => Err(unknown_preset(name)),
        },
        _ => Err(Error::Config("pass a config file or --preset <name>".into())),
    }
}

fn load_sweep(source: &Source) -> saddlebench::Result<(SweepConfig, PathBuf)> {
    match (&source.config, &source.preset) {
        (Some(path), None) => Ok((SweepConfig::from_path(path)?, PathBuf::from(stem_of(path)))),
        (None, Some(name)) => match presets::by_name(name) {
            Some(p) => match p.kind {
                PresetKind::Sweep(cfg) => Ok((cfg, PathBuf::from(name.clone()))),
                other => Err(Error::Config(format!(
                    "preset `{name}` is a {} preset; use the matching subcommand",
                    other.label()
                ))),
            },
            None => Err(unknown_preset(name)),
        },
        _ => Err(Error::Config("pass a config file or --preset <name>".into())),
    }
}

fn load_plot(source: &Source) -> saddlebench::Result<PlotSpec> {
    match (&source.config, &source.preset) {
        (Some(path), None) => PlotSpec::from_path(path),
        (None, Some(name)) => match presets::by_name(name) {
            Some(p) => match p.kind {
                PresetKind::Plot(spec) => Ok(spec),
                other => Err(Error::Config(format!(
                    "preset `{name}` is a {} preset; use the matching subcommand",
                    other.label()
                ))),
            },
            None => Err(unknown_preset(name)),
        },
        _ => Err(Error::Config("pass a plot spec file or --preset <name>".into())),
    }
}

fn unknown_preset(name: &str) -> Error {
    let known: Vec<&str> = presets::all().iter().map(|p| p.name).collect();
    Error::Config(format!("unknown preset `{name}`; known presets: {}", known.join(", ")))
}

fn run_convert(path: &Path, to_f: bool) -> saddlebench::Result<ConvertReport> {
    let cfg: ConvertConfig = config::load_toml(path)?;
    let problem = cfg.problem.build()?;
    let mut rng = RngStream::new(cfg.seed, StreamId::OracleY);
    let budget = cfg.budget.unwrap_or(saddlebench::ESTIMATION_BUDGET);
    let result = if to_f {
        let eps_prime = cfg.eps_prime.ok_or_else(|| {
            Error::Config("`eps_prime` (incoming y-stationarity level) is required for to-f".into())
        })?;
        convert::to_f_stationary_with_budget(
            &problem,
            &cfg.x,
            &cfg.y,
            cfg.eps,
            eps_prime,
            cfg.stochastic,
            &mut rng,
            budget,
        )?
    } else {
        convert::to_phi_stationary_with_budget(
            &problem,
            &cfg.x,
            &cfg.y,
            cfg.eps,
            cfg.stochastic,
            &mut rng,
            budget,
        )?
    };
    let cert = &result.certificate;
    Ok(ConvertReport {
        x: result.point.x.clone(),
        y: result.point.y.clone(),
        iterations: result.iterations,
        oracle_calls: result.oracle_calls,
        grad_f_x_norm: cert.grad_f_x_norm,
        grad_f_y_norm: cert.grad_f_y_norm,
        eps_pair: cert.eps_pair,
        grad_phi_norm: cert.grad_phi_norm.as_ref().map(|v| v.value),
        grad_phi_exact: cert.grad_phi_norm.as_ref().map(|v| v.exact),
        warnings: result.warnings.clone(),
    })
}
