//! Stepsize grid sweeps: a cartesian grid of (τ₁, τ₂[, β, p]) cells, each
//! run under several derived seeds, reduced to per-seed rows and per-cell
//! aggregates. Cells run in parallel but results are indexed, so output
//! files are byte-identical regardless of scheduling.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::harness::config::{MetricId, RunConfig, SolverConfig, StepSizeConfig, SweepConfig};
use crate::harness::run::{run_config, RunOutcome};
use crate::harness::trace::{format_value, provenance_header};
use crate::rng::derive_seed;
use crate::{Error, Result};

/// One grid cell's parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    pub tau1: f64,
    pub tau2: f64,
    pub beta: f64,
    pub p: f64,
}

/// Outcome of one (cell, seed) run.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell_index: usize,
    pub params: CellParams,
    pub seed_index: u64,
    pub seed: u64,
    /// Final row's value per trace column; `None` for failed runs.
    pub finals: Option<Vec<Option<f64>>>,
    /// Minimum over the trace per column (all shipped metrics improve
    /// downward).
    pub bests: Option<Vec<Option<f64>>>,
    pub iters_to_threshold: Option<u64>,
    pub status: RunStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Ok,
    Diverged,
    /// Run-time estimation failure (for example a metric solve that hit
    /// its budget at an extreme stepsize); the sweep records it and moves
    /// on.
    Error(String),
}

impl RunStatus {
    fn label(&self) -> &str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Diverged => "diverged",
            RunStatus::Error(_) => "error",
        }
    }
}

/// Per-cell aggregate over seeds.
#[derive(Debug, Clone)]
pub struct CellSummary {
    pub cell_index: usize,
    pub params: CellParams,
    pub n_seeds: u64,
    pub n_ok: u64,
    pub n_diverged: u64,
    pub n_error: u64,
    /// Mean/sample-std of final values over successful seeds, per column.
    pub mean_final: Vec<Option<f64>>,
    pub std_final: Vec<Option<f64>>,
    /// Seeds that reached the threshold, and the median iteration-to-threshold
    /// over *all* seeds, counting seeds that never reached it as unbounded
    /// (midpoint of the two central values for even counts). The median is
    /// `None` unless enough seeds hit to pin the midpoint — a cell where only
    /// a lucky minority of seeds dipped through the threshold has no
    /// determined median and cannot rank as a best cell.
    pub hit_count: u64,
    pub median_iters: Option<f64>,
}

/// Full sweep outcome plus the column names the per-column vectors refer
/// to.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub columns: Vec<String>,
    pub cells: Vec<CellResult>,
    pub summaries: Vec<CellSummary>,
}

impl SweepOutcome {
    /// The summary with the smallest determined median iteration-to-threshold,
    /// breaking ties by cell index. Cells whose median is censored (fewer than
    /// a majority of seeds hit) never rank.
    pub fn best_cell_by_median(&self) -> Option<&CellSummary> {
        self.summaries
            .iter()
            .filter(|s| s.median_iters.is_some())
            .min_by(|a, b| {
                let ma = (a.median_iters.unwrap(), a.cell_index);
                let mb = (b.median_iters.unwrap(), b.cell_index);
                ma.partial_cmp(&mb).unwrap_or(std::cmp::Ordering::Equal)
            })
    }
}

/// Runs the sweep; writes `<output>_cells.csv` and `<output>_summary.csv`
/// when an output base is configured.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome> {
    config.validate()?;
    // Surface problem-construction errors once instead of per cell.
    config.base.problem.build()?;

    let mut metrics = config.base.metrics.clone();
    if let Some(th) = &config.threshold {
        if !metrics.contains(&th.metric) {
            metrics.push(th.metric);
        }
    }
    let columns: Vec<String> = metrics
        .iter()
        .flat_map(|m| m.columns().iter().map(|c| c.to_string()))
        .collect();
    let threshold_col = config.threshold.map(|th| {
        let name = th.metric.columns()[0];
        (
            columns.iter().position(|c| c == name).expect("threshold metric was appended"),
            th.value,
        )
    });

    let grid = expand_grid(config)?;
    let jobs: Vec<(usize, CellParams, u64)> = grid
        .iter()
        .enumerate()
        .flat_map(|(ci, p)| (0..config.seeds).map(move |si| (ci, *p, si)))
        .collect();

    let mut results: Vec<Option<CellResult>> = vec![None; jobs.len()];
    let next = AtomicUsize::new(0);
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(jobs.len().max(1));

    {
        let results = Mutex::new(&mut results);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let j = next.fetch_add(1, Ordering::Relaxed);
                    if j >= jobs.len() || failure.lock().unwrap().is_some() {
                        return;
                    }
                    let (ci, params, si) = jobs[j];
                    match run_cell(config, &metrics, threshold_col, ci, params, si, j as u64) {
                        Ok(cell) => {
                            results.lock().unwrap()[j] = Some(cell);
                        }
                        Err(e) => {
                            let mut slot = failure.lock().unwrap();
                            if slot.is_none() {
                                *slot = Some(e);
                            }
                            return;
                        }
                    }
                });
            }
        });
    }
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let cells: Vec<CellResult> = results.into_iter().map(|c| c.expect("all jobs ran")).collect();
    let summaries = summarize(&grid, &cells, columns.len(), config.seeds);
    let outcome = SweepOutcome { columns, cells, summaries };

    if let Some(base) = &config.output {
        write_cells_csv(&cells_path(base), config, &outcome)?;
        write_summary_csv(&summary_path(base), config, &outcome)?;
    }
    Ok(outcome)
}

pub fn cells_path(base: &PathBuf) -> PathBuf {
    append_suffix(base, "_cells.csv")
}

pub fn summary_path(base: &PathBuf) -> PathBuf {
    append_suffix(base, "_summary.csv")
}

fn append_suffix(base: &PathBuf, suffix: &str) -> PathBuf {
    let mut s = base.clone().into_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// The cartesian cell list; β/p grids fall back to the base solver's
/// values (or plain-step defaults) when empty.
fn expand_grid(config: &SweepConfig) -> Result<Vec<CellParams>> {
    let (base_beta, base_p) = match &config.base.solver {
        SolverConfig::Agda { stepsizes }
        | SolverConfig::Gda { stepsizes }
        | SolverConfig::SmoothedAgda { stepsizes } => match stepsizes {
            StepSizeConfig::Explicit { p, beta, .. } => (*beta, *p),
            _ => (1.0, 0.0),
        },
        _ => (1.0, 0.0),
    };
    let betas = if config.beta.is_empty() { vec![base_beta] } else { config.beta.clone() };
    let ps = if config.p.is_empty() { vec![base_p] } else { config.p.clone() };
    let mut grid = Vec::new();
    for &tau1 in &config.tau1 {
        for &tau2 in &config.tau2 {
            for &beta in &betas {
                for &p in &ps {
                    grid.push(CellParams { tau1, tau2, beta, p });
                }
            }
        }
    }
    Ok(grid)
}

fn cell_run_config(
    config: &SweepConfig,
    metrics: &[MetricId],
    params: CellParams,
    job_index: u64,
) -> RunConfig {
    let mut run = config.base.clone();
    run.metrics = metrics.to_vec();
    run.cadence = 1; // threshold clocks inspect every iteration
    run.output = None;
    run.timing = false;
    run.seed = derive_seed(config.base.seed, job_index);
    let stepsizes = StepSizeConfig::Explicit {
        tau1: params.tau1,
        tau2: params.tau2,
        p: params.p,
        beta: params.beta,
    };
    run.solver = match &config.base.solver {
        SolverConfig::Gda { .. } => SolverConfig::Gda { stepsizes },
        SolverConfig::SmoothedAgda { .. } => SolverConfig::SmoothedAgda { stepsizes },
        _ => SolverConfig::Agda { stepsizes },
    };
    run
}

fn run_cell(
    config: &SweepConfig,
    metrics: &[MetricId],
    threshold_col: Option<(usize, f64)>,
    cell_index: usize,
    params: CellParams,
    seed_index: u64,
    job_index: u64,
) -> Result<CellResult> {
    let run = cell_run_config(config, metrics, params, job_index);
    let seed = run.seed;
    let outcome = match run_config(&run) {
        Ok(o) => o,
        // Bad stepsizes are a legitimate grid point outcome, not a reason
        // to kill the sweep; true config errors already failed validation.
        Err(Error::Config(msg)) => {
            return Ok(failed_cell(cell_index, params, seed_index, seed, RunStatus::Error(msg)))
        }
        Err(Error::NonConvergence { context, .. }) => {
            return Ok(failed_cell(
                cell_index,
                params,
                seed_index,
                seed,
                RunStatus::Error(context),
            ))
        }
        Err(Error::Numeric { context, detail }) => {
            return Ok(failed_cell(
                cell_index,
                params,
                seed_index,
                seed,
                RunStatus::Error(format!("{context}: {detail}")),
            ))
        }
        Err(e) => return Err(e),
    };
    Ok(reduce_outcome(cell_index, params, seed_index, seed, threshold_col, &outcome))
}

fn failed_cell(
    cell_index: usize,
    params: CellParams,
    seed_index: u64,
    seed: u64,
    status: RunStatus,
) -> CellResult {
    CellResult {
        cell_index,
        params,
        seed_index,
        seed,
        finals: None,
        bests: None,
        iters_to_threshold: None,
        status,
    }
}

fn reduce_outcome(
    cell_index: usize,
    params: CellParams,
    seed_index: u64,
    seed: u64,
    threshold_col: Option<(usize, f64)>,
    outcome: &RunOutcome,
) -> CellResult {
    let parsed: Vec<Vec<Option<f64>>> = outcome
        .trace
        .rows
        .iter()
        .map(|r| r.values.iter().map(|v| v.parse::<f64>().ok()).collect())
        .collect();
    let ncol = outcome.trace.columns.len();
    let finals = parsed.last().cloned().unwrap_or_else(|| vec![None; ncol]);
    let bests = (0..ncol)
        .map(|c| {
            parsed
                .iter()
                .filter_map(|row| row[c])
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
        })
        .collect();
    let iters_to_threshold = threshold_col.and_then(|(col, value)| {
        outcome
            .trace
            .rows
            .iter()
            .zip(&parsed)
            .find(|(_, row)| row[col].is_some_and(|v| v < value))
            .map(|(r, _)| r.iter)
    });
    CellResult {
        cell_index,
        params,
        seed_index,
        seed,
        finals: Some(finals),
        bests: Some(bests),
        iters_to_threshold,
        status: if outcome.diverged() { RunStatus::Diverged } else { RunStatus::Ok },
    }
}

fn summarize(
    grid: &[CellParams],
    cells: &[CellResult],
    ncol: usize,
    seeds: u64,
) -> Vec<CellSummary> {
    grid.iter()
        .enumerate()
        .map(|(ci, params)| {
            let mine: Vec<&CellResult> = cells.iter().filter(|c| c.cell_index == ci).collect();
            let ok: Vec<&&CellResult> =
                mine.iter().filter(|c| c.status == RunStatus::Ok).collect();
            let mut mean_final = vec![None; ncol];
            let mut std_final = vec![None; ncol];
            for c in 0..ncol {
                let vals: Vec<f64> = ok
                    .iter()
                    .filter_map(|r| r.finals.as_ref().and_then(|f| f[c]))
                    .collect();
                if vals.is_empty() {
                    continue;
                }
                let n = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / n;
                mean_final[c] = Some(mean);
                std_final[c] = Some(if vals.len() < 2 {
                    0.0
                } else {
                    (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                });
            }
            let mut hits: Vec<u64> =
                mine.iter().filter_map(|c| c.iters_to_threshold).collect();
            hits.sort_unstable();
            let median_iters = censored_median(&hits, seeds as usize);
            CellSummary {
                cell_index: ci,
                params: *params,
                n_seeds: seeds,
                n_ok: ok.len() as u64,
                n_diverged: mine
                    .iter()
                    .filter(|c| c.status == RunStatus::Diverged)
                    .count() as u64,
                n_error: mine
                    .iter()
                    .filter(|c| matches!(c.status, RunStatus::Error(_)))
                    .count() as u64,
                hit_count: hits.len() as u64,
                median_iters,
                mean_final,
                std_final,
            }
        })
        .collect()
}

/// Median over `n` seeds where only the first `sorted.len()` reached the
/// threshold; the rest sit past the horizon and count as unbounded. `None`
/// when the midpoint falls among the unbounded entries.
fn censored_median(sorted: &[u64], n: usize) -> Option<f64> {
    if n == 0 {
        return None;
    }
    if n % 2 == 1 {
        sorted.get(n / 2).map(|&v| v as f64)
    } else {
        match (sorted.get(n / 2 - 1), sorted.get(n / 2)) {
            (Some(&a), Some(&b)) => Some((a as f64 + b as f64) / 2.0),
            _ => None,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

fn write_csv(path: &std::path::Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::Io(format!("creating {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))
}

/// Copy of the config with destination paths removed: the embedded header
/// describes how to reproduce the rows, and recording where the file ended
/// up would make otherwise-identical sweeps differ byte-wise.
fn header_config(config: &SweepConfig) -> SweepConfig {
    let mut c = config.clone();
    c.output = None;
    c.base.output = None;
    c
}

fn write_cells_csv(
    path: &std::path::Path,
    config: &SweepConfig,
    outcome: &SweepOutcome,
) -> Result<()> {
    let mut text = String::new();
    for line in provenance_header("sweep-cells", &header_config(config)) {
        let _ = writeln!(text, "# {line}");
    }
    text.push_str("cell,tau1,tau2,beta,p,seed_index,seed");
    for c in &outcome.columns {
        let _ = write!(text, ",final_{c},best_{c}");
    }
    text.push_str(",iters_to_threshold,status\n");
    for r in &outcome.cells {
        let _ = write!(
            text,
            "{},{},{},{},{},{},{}",
            r.cell_index,
            format_value(r.params.tau1),
            format_value(r.params.tau2),
            format_value(r.params.beta),
            format_value(r.params.p),
            r.seed_index,
            r.seed
        );
        for c in 0..outcome.columns.len() {
            let f = r.finals.as_ref().and_then(|v| v[c]);
            let b = r.bests.as_ref().and_then(|v| v[c]);
            let _ = write!(text, ",{},{}", opt(f), opt(b));
        }
        let iters = r.iters_to_threshold.map(|i| i.to_string()).unwrap_or_default();
        let _ = writeln!(text, ",{iters},{}", r.status.label());
    }
    write_csv(path, &text)
}

fn write_summary_csv(
    path: &std::path::Path,
    config: &SweepConfig,
    outcome: &SweepOutcome,
) -> Result<()> {
    let mut text = String::new();
    for line in provenance_header("sweep-summary", &header_config(config)) {
        let _ = writeln!(text, "# {line}");
    }
    text.push_str("cell,tau1,tau2,beta,p,n_seeds,n_ok,n_diverged,n_error");
    for c in &outcome.columns {
        let _ = write!(text, ",mean_final_{c},std_final_{c}");
    }
    text.push_str(",hit_count,median_iters_to_threshold\n");
    for s in &outcome.summaries {
        let _ = write!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            s.cell_index,
            format_value(s.params.tau1),
            format_value(s.params.tau2),
            format_value(s.params.beta),
            format_value(s.params.p),
            s.n_seeds,
            s.n_ok,
            s.n_diverged,
            s.n_error
        );
        for c in 0..outcome.columns.len() {
            let _ = write!(text, ",{},{}", opt(s.mean_final[c]), opt(s.std_final[c]));
        }
        let _ = writeln!(text, ",{},{}", s.hit_count, opt(s.median_iters));
    }
    write_csv(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ProblemConfig, ThresholdConfig};

    fn base_run() -> RunConfig {
        RunConfig {
            problem: ProblemConfig::Quadratic { a: 1.0, b: 1.0, c: 2.0, sigma: 0.0 },
            solver: SolverConfig::Agda {
                stepsizes: StepSizeConfig::Explicit { tau1: 0.1, tau2: 0.1, p: 0.0, beta: 1.0 },
            },
            horizon: 400,
            seed: 99,
            metrics: vec![MetricId::GradPhi],
            cadence: 1,
            output: None,
            timing: false,
            start_x: None,
            start_y: None,
            warm_start_y: 0,
            metric_tol: 1e-6,
        }
    }

    fn small_sweep(output: Option<PathBuf>) -> SweepConfig {
        SweepConfig {
            base: base_run(),
            tau1: vec![0.05, 0.2],
            tau2: vec![0.1, 0.4],
            beta: vec![],
            p: vec![],
            seeds: 2,
            threshold: Some(ThresholdConfig { metric: MetricId::GradPhi, value: 1e-3 }),
            output,
        }
    }

    #[test]
    fn covers_the_grid_and_reaches_thresholds() {
        let out = run_sweep(&small_sweep(None)).unwrap();
        assert_eq!(out.cells.len(), 8); // 2×2 cells × 2 seeds
        assert_eq!(out.summaries.len(), 4);
        // Deterministic problem: both seeds of a cell agree.
        for s in &out.summaries {
            assert_eq!(s.n_seeds, 2);
            assert_eq!(s.n_ok + s.n_diverged + s.n_error, 2);
        }
        let best = out.best_cell_by_median().expect("some cell hits 1e-3");
        // Larger stepsizes contract faster on this well-conditioned saddle.
        assert_eq!((best.params.tau1, best.params.tau2), (0.2, 0.4));
    }

    #[test]
    fn cell_seeds_differ_but_rerun_identically() {
        let cfg = small_sweep(None);
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        let seeds_a: Vec<u64> = a.cells.iter().map(|c| c.seed).collect();
        let seeds_b: Vec<u64> = b.cells.iter().map(|c| c.seed).collect();
        assert_eq!(seeds_a, seeds_b);
        let mut unique = seeds_a.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), seeds_a.len(), "derived seeds must not collide");
    }

    #[test]
    fn divergent_cells_are_recorded_and_the_sweep_continues() {
        let mut cfg = small_sweep(None);
        cfg.base.problem = ProblemConfig::Quadratic { a: -1.0, b: 1.0, c: 2.0, sigma: 0.0 };
        cfg.tau1 = vec![0.05, 3.0]; // the 3.0 column repels from the saddle point
        let out = run_sweep(&cfg).unwrap();
        let diverged: Vec<_> =
            out.cells.iter().filter(|c| c.status == RunStatus::Diverged).collect();
        assert!(!diverged.is_empty());
        assert!(out.cells.iter().any(|c| c.status == RunStatus::Ok));
        for c in diverged {
            assert_eq!(c.params.tau1, 3.0);
            assert!(c.finals.is_some(), "partial trace still yields finals");
        }
    }

    #[test]
    fn writes_cells_and_summary_files_with_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("grid");
        let cfg = small_sweep(Some(base.clone()));
        run_sweep(&cfg).unwrap();
        let cells = std::fs::read_to_string(cells_path(&base)).unwrap();
        let summary = std::fs::read_to_string(summary_path(&base)).unwrap();
        assert!(cells.lines().any(|l| l.starts_with("# produced-by: saddlebench")));
        assert!(cells.lines().any(|l| l.starts_with("cell,tau1,tau2,beta,p,seed_index,seed")));
        assert_eq!(cells.lines().filter(|l| !l.starts_with('#') ).count(), 9); // header + 8 rows
        assert!(summary.contains("median_iters_to_threshold"));
        assert_eq!(summary.lines().filter(|l| !l.starts_with('#')).count(), 5);

        // Byte-identical on rerun.
        run_sweep(&cfg).unwrap();
        assert_eq!(std::fs::read_to_string(cells_path(&base)).unwrap(), cells);
    }

    #[test]
    fn median_counts_missing_seeds_as_unbounded() {
        assert_eq!(censored_median(&[], 0), None);
        assert_eq!(censored_median(&[5], 1), Some(5.0));
        assert_eq!(censored_median(&[2, 8], 2), Some(5.0));
        assert_eq!(censored_median(&[1, 2, 100], 3), Some(2.0));
        // Minority hits leave the midpoint censored: two fast dips out of
        // five seeds do not give the cell a median.
        assert_eq!(censored_median(&[3, 4], 5), None);
        assert_eq!(censored_median(&[3, 4, 9], 5), Some(9.0));
        assert_eq!(censored_median(&[3, 4], 4), None);
        assert_eq!(censored_median(&[3, 4, 9], 4), Some(6.5));
        assert_eq!(censored_median(&[], 3), None);
    }
}
