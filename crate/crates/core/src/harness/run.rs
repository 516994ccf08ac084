//! Single-run execution: builds the problem and solver from a config,
//! steps to the horizon, samples metrics on the configured cadence, and
//! assembles an in-memory trace.
//!
//! Two contracts matter here. First, metrics never touch the solver's
//! random streams — every estimate is deterministic — so adding or
//! removing metrics cannot change a trajectory. Second, divergence is a
//! recorded outcome, not an error: the trace keeps every sampled row up
//! to the blow-up plus a marker, and the caller decides how to exit.

use std::time::Instant;

use crate::harness::config::{MetricId, RunConfig, SolverConfig, StepSizeConfig};
use crate::harness::trace::{format_value, Trace, TraceRow};
use crate::metrics;
use crate::problems::{MinimaxProblem, Point};
use crate::rng::{derive_seed, RngStream, StreamId};
use crate::solvers::{
    self, catalyst_agda_run, catalyst_inner_stepsizes, catalyst_stop_factor, SolverState,
    StepSizes, StoppingRule,
};
use crate::{Error, Result};

/// Seed-derivation index reserved for the warm-start ascent stream, far
/// outside the range sweep cells use.
const WARM_START_STREAM: u64 = 1_000_003;

/// The result of executing one run config.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: Trace,
    pub final_point: Point,
    pub oracle_calls: u64,
}

impl RunOutcome {
    pub fn diverged(&self) -> bool {
        self.trace.diverged.is_some()
    }
}

/// Executes `config` and returns the trace. Errors are reserved for
/// configuration and estimation failures; trajectory blow-up lands in
/// `RunOutcome::trace.diverged`.
pub fn run_config(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let problem = config.problem.build()?;
    let start = resolve_start(&problem, config)?;

    let columns: Vec<String> = config
        .metrics
        .iter()
        .flat_map(|m| m.columns().iter().map(|c| c.to_string()))
        .collect();
    let ctx = MetricCtx {
        problem: &problem,
        anchor: start.x.clone(),
        tol: config.metric_tol,
    };

    match &config.solver {
        SolverConfig::CatalystAgda { gap_ratio, max_inner, inner } => run_catalyst(
            config,
            &problem,
            start,
            &ctx,
            columns,
            *gap_ratio,
            *max_inner,
            inner.as_ref(),
        ),
        _ => run_stepwise(config, &problem, start, &ctx, columns),
    }
}

fn resolve_start(problem: &MinimaxProblem, config: &RunConfig) -> Result<Point> {
    let mut start = problem.default_init(config.seed);
    if let Some(x) = &config.start_x {
        start.x = x.clone();
    }
    if let Some(y) = &config.start_y {
        start.y = y.clone();
    }
    if config.warm_start_y > 0 {
        let mut rng = RngStream::new(derive_seed(config.seed, WARM_START_STREAM), StreamId::OracleY);
        let tau = 1.0 / problem.smoothness_l();
        start.y = solvers::gradient_ascent(
            problem,
            &start.x,
            start.y,
            tau,
            config.warm_start_y,
            &mut rng,
        )?;
    }
    Ok(start)
}

/// Everything a metric evaluation needs besides the point itself. The gap
/// anchor is pinned to the run's starting x so the column measures
/// progress against a fixed auxiliary objective.
struct MetricCtx<'a> {
    problem: &'a MinimaxProblem,
    anchor: Vec<f64>,
    tol: f64,
}

impl MetricCtx<'_> {
    fn sample(
        &self,
        id: MetricId,
        point: &Point,
        z: Option<&[f64]>,
        p_strength: Option<f64>,
    ) -> Result<Vec<String>> {
        let flag = |exact: bool| if exact { "1".to_string() } else { "0".to_string() };
        Ok(match id {
            MetricId::GradF => {
                let (gx, gy) = self.problem.grad(point)?;
                vec![
                    format_value(crate::linalg::norm(&gx)),
                    format_value(crate::linalg::norm(&gy)),
                ]
            }
            MetricId::GradPhi => {
                let v = metrics::grad_phi(self.problem, &point.x, self.tol)?;
                vec![format_value(v.value), flag(v.exact)]
            }
            MetricId::Moreau => {
                let v = metrics::moreau_grad(self.problem, &point.x, self.tol)?;
                vec![format_value(v.value), flag(v.exact)]
            }
            MetricId::PotentialAgda => {
                let v = metrics::potential_agda(self.problem, point)?;
                vec![format_value(v.value), flag(v.exact)]
            }
            MetricId::PotentialSmoothed => {
                let z = z.ok_or_else(|| {
                    Error::Config(
                        "potential-smoothed sampled without a proximal center".into(),
                    )
                })?;
                let p = p_strength.ok_or_else(|| {
                    Error::Config(
                        "potential-smoothed sampled without a smoothing strength".into(),
                    )
                })?;
                let v = metrics::potential_smoothed(self.problem, point, z, p)?;
                vec![format_value(v.value), flag(v.exact)]
            }
            MetricId::Gap => {
                let g = metrics::gap_bound(self.problem, &self.anchor, point)?;
                vec![
                    g.exact.map(format_value).unwrap_or_default(),
                    format_value(g.surrogate),
                ]
            }
            MetricId::DistToOpt => {
                vec![format_value(self.problem.dist_to_opt(point)?)]
            }
        })
    }

    fn sample_row(
        &self,
        config: &RunConfig,
        iter: u64,
        oracle_calls: u64,
        point: &Point,
        z: Option<&[f64]>,
        p_strength: Option<f64>,
        started: &Instant,
    ) -> Result<TraceRow> {
        let mut values = Vec::new();
        for id in &config.metrics {
            values.extend(self.sample(*id, point, z, p_strength)?);
        }
        Ok(TraceRow {
            iter,
            oracle_calls,
            values,
            elapsed_ns: config.timing.then(|| started.elapsed().as_nanos()),
        })
    }
}

/// Per-iteration solvers: a state plus a pure step map.
enum Stepper {
    Agda(StepSizes),
    Gda(StepSizes),
    Smoothed(StepSizes),
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
    Rmsprop { lr: f64, decay: f64, eps: f64 },
    Ascent { tau: f64 },
}

impl Stepper {
    fn from_config(
        config: &RunConfig,
        problem: &MinimaxProblem,
        start: &Point,
    ) -> Result<Stepper> {
        Ok(match &config.solver {
            SolverConfig::Agda { stepsizes } => {
                Stepper::Agda(stepsizes.build(problem, config.horizon, start)?)
            }
            SolverConfig::Gda { stepsizes } => {
                Stepper::Gda(stepsizes.build(problem, config.horizon, start)?)
            }
            SolverConfig::SmoothedAgda { stepsizes } => {
                Stepper::Smoothed(stepsizes.build(problem, config.horizon, start)?)
            }
            SolverConfig::Adam { lr, beta1, beta2, eps } => {
                Stepper::Adam { lr: *lr, beta1: *beta1, beta2: *beta2, eps: *eps }
            }
            SolverConfig::Rmsprop { lr, decay, eps } => {
                Stepper::Rmsprop { lr: *lr, decay: *decay, eps: *eps }
            }
            SolverConfig::GradientAscent { tau } => {
                Stepper::Ascent { tau: tau.unwrap_or(1.0 / problem.smoothness_l()) }
            }
            SolverConfig::CatalystAgda { .. } => {
                unreachable!("catalyst runs through run_catalyst")
            }
        })
    }

    fn smoothing_strength(&self) -> Option<f64> {
        match self {
            Stepper::Smoothed(s) => Some(s.p),
            _ => None,
        }
    }
}

fn run_stepwise(
    config: &RunConfig,
    problem: &MinimaxProblem,
    start: Point,
    ctx: &MetricCtx,
    columns: Vec<String>,
) -> Result<RunOutcome> {
    let stepper = Stepper::from_config(config, problem, &start)?;
    let mut state = SolverState::new(problem, start, config.seed)?;
    if matches!(stepper, Stepper::Smoothed(_)) {
        state = state.with_proximal_center();
    }
    let p_strength = stepper.smoothing_strength();
    let started = Instant::now();

    // The initial sample doubles as the availability probe: any metric the
    // problem/solver combination cannot provide fails here, before any
    // solver work.
    let first = ctx.sample_row(
        config,
        0,
        0,
        &state.point,
        state.z.as_deref(),
        p_strength,
        &started,
    )?;
    let mut rows = vec![first];
    let mut diverged = None;

    for iter in 1..=config.horizon {
        let stepped = match &stepper {
            Stepper::Agda(s) => solvers::stoc_agda_step(problem, state, s),
            Stepper::Gda(s) => solvers::gda_step(problem, state, s),
            Stepper::Smoothed(s) => solvers::smoothed_agda_step(problem, state, s),
            Stepper::Adam { lr, beta1, beta2, eps } => {
                solvers::adam_step(problem, state, *lr, *beta1, *beta2, *eps)
            }
            Stepper::Rmsprop { lr, decay, eps } => {
                solvers::rmsprop_step(problem, state, *lr, *decay, *eps)
            }
            Stepper::Ascent { tau } => ascent_step(problem, state, *tau),
        };
        match stepped {
            Ok(next) => {
                state = next;
                if iter % config.cadence == 0 || iter == config.horizon {
                    rows.push(ctx.sample_row(
                        config,
                        iter,
                        state.oracle_calls,
                        &state.point,
                        state.z.as_deref(),
                        p_strength,
                        &started,
                    )?);
                }
            }
            Err(Error::Diverged { iter: at, detail, last }) => {
                diverged = Some(format!(
                    "iteration {at}: {detail}; last finite point x={:?} y={:?}",
                    last.x, last.y
                ));
                // The state was consumed by the failed step; keep the last
                // finite iterate as the outcome point.
                let trace = Trace { columns, rows, diverged, timing: config.timing };
                return Ok(RunOutcome {
                    oracle_calls: trace.rows.last().map(|r| r.oracle_calls).unwrap_or(0),
                    trace,
                    final_point: last,
                });
            }
            Err(e) => return Err(e),
        }
    }

    Ok(RunOutcome {
        oracle_calls: state.oracle_calls,
        trace: Trace { columns, rows, diverged, timing: config.timing },
        final_point: state.point,
    })
}

/// One ascent-only iteration, wrapped in solver-state bookkeeping so the
/// trace loop treats it like every other method (x stays fixed).
fn ascent_step(problem: &MinimaxProblem, mut state: SolverState, tau: f64) -> Result<SolverState> {
    let y = std::mem::take(&mut state.point.y);
    state.point.y = solvers::gradient_ascent(problem, &state.point.x, y, tau, 1, &mut state.rng.oracle_y)?;
    state.iter += 1;
    state.oracle_calls += 1;
    Ok(state)
}

#[allow(clippy::too_many_arguments)]
fn run_catalyst(
    config: &RunConfig,
    problem: &MinimaxProblem,
    start: Point,
    ctx: &MetricCtx,
    columns: Vec<String>,
    gap_ratio: Option<f64>,
    max_inner: u64,
    inner: Option<&StepSizeConfig>,
) -> Result<RunOutcome> {
    let kappa = problem.smoothness_l() / problem.pl_mu();
    let ratio = match gap_ratio {
        Some(r) => r,
        None => catalyst_stop_factor(kappa)?,
    };
    let stop = StoppingRule::new(ratio, max_inner)?;
    let inner_s = match inner {
        Some(cfg) => cfg.build(problem, config.horizon, &start)?,
        None => catalyst_inner_stepsizes(problem.smoothness_l())?,
    };
    let started = Instant::now();

    let first = ctx.sample_row(config, 0, 0, &start, None, None, &started)?;
    let mut rows = vec![first];
    let mut point = start;
    let mut total_calls = 0u64;

    // One proximal stage per call keeps cadence sampling and partial
    // divergence handling identical to the stepwise path; stages carry no
    // hidden state between them, so this matches a single multi-stage run.
    for stage in 1..=config.horizon {
        match catalyst_agda_run(problem, point.clone(), 1, &stop, &inner_s) {
            Ok(tr) => {
                total_calls += tr.total_oracle_calls;
                point = tr.final_point;
                if stage % config.cadence == 0 || stage == config.horizon {
                    rows.push(ctx.sample_row(
                        config,
                        stage,
                        total_calls,
                        &point,
                        None,
                        None,
                        &started,
                    )?);
                }
            }
            Err(Error::Diverged { iter: at, detail, last }) => {
                let diverged = Some(format!(
                    "stage {stage}, inner iteration {at}: {detail}; last finite point \
                     x={:?} y={:?}",
                    last.x, last.y
                ));
                let trace = Trace { columns, rows, diverged, timing: config.timing };
                return Ok(RunOutcome {
                    oracle_calls: total_calls,
                    trace,
                    final_point: last,
                });
            }
            Err(e) => return Err(e),
        }
    }

    Ok(RunOutcome {
        oracle_calls: total_calls,
        trace: Trace { columns, rows, diverged: None, timing: config.timing },
        final_point: point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ProblemConfig;

    fn quadratic_config(solver: SolverConfig, metrics: Vec<MetricId>, horizon: u64) -> RunConfig {
        RunConfig {
            problem: ProblemConfig::Quadratic { a: 1.0, b: 1.0, c: 2.0, sigma: 0.0 },
            solver,
            horizon,
            seed: 7,
            metrics,
            cadence: 1,
            output: None,
            timing: false,
            start_x: None,
            start_y: None,
            warm_start_y: 0,
            metric_tol: 1e-6,
        }
    }

    fn agda(tau1: f64, tau2: f64) -> SolverConfig {
        SolverConfig::Agda {
            stepsizes: StepSizeConfig::Explicit { tau1, tau2, p: 0.0, beta: 1.0 },
        }
    }

    #[test]
    fn produces_initial_row_plus_cadenced_rows() {
        let mut cfg = quadratic_config(
            agda(0.1, 0.1),
            vec![MetricId::GradF, MetricId::GradPhi],
            10,
        );
        cfg.cadence = 4;
        let out = run_config(&cfg).unwrap();
        let iters: Vec<u64> = out.trace.rows.iter().map(|r| r.iter).collect();
        // Initial row, every 4th iteration, and the horizon.
        assert_eq!(iters, vec![0, 4, 8, 10]);
        assert_eq!(out.trace.columns, vec!["grad_f_x", "grad_f_y", "grad_phi", "grad_phi_exact"]);
        // Alternating steps make two oracle calls each.
        assert_eq!(out.oracle_calls, 20);
        assert!(!out.diverged());
    }

    #[test]
    fn zero_horizon_gives_only_the_initial_row() {
        let cfg = quadratic_config(agda(0.1, 0.1), vec![MetricId::GradF], 0);
        let out = run_config(&cfg).unwrap();
        assert_eq!(out.trace.rows.len(), 1);
        assert_eq!(out.trace.rows[0].iter, 0);
        assert_eq!(out.final_point.x, vec![1.0]);
    }

    #[test]
    fn theorem_stepsizes_resolve_against_the_run_horizon() {
        let cfg = quadratic_config(
            SolverConfig::Agda { stepsizes: StepSizeConfig::Theorem1 { horizon: None, delta: None } },
            vec![MetricId::GradPhi],
            100,
        );
        let out = run_config(&cfg).unwrap();
        // Deterministic theorem-1 stepsizes contract ‖∇Φ‖ on this problem.
        let first: f64 = out.trace.rows[0].values[0].parse().unwrap();
        let last: f64 = out.trace.rows.last().unwrap().values[0].parse().unwrap();
        assert!(last < first * 0.9, "no progress: {first} -> {last}");
    }

    #[test]
    fn divergence_is_recorded_not_raised() {
        // a < 0 with a large stepsize makes the x-update repel from the
        // stationary point.
        let mut cfg = quadratic_config(agda(3.0, 0.1), vec![MetricId::GradF], 200);
        cfg.problem = ProblemConfig::Quadratic { a: -1.0, b: 1.0, c: 2.0, sigma: 0.0 };
        let out = run_config(&cfg).unwrap();
        assert!(out.diverged());
        let marker = out.trace.diverged.unwrap();
        assert!(marker.contains("last finite point"), "{marker}");
        assert!(out.final_point.x[0].is_finite());
        assert!(!out.trace.rows.is_empty());
    }

    #[test]
    fn unavailable_metric_fails_before_any_stepping() {
        let mut cfg = quadratic_config(agda(0.1, 0.1), vec![MetricId::DistToOpt], 10);
        // The degenerate problem declares no optimum.
        cfg.problem = toml::from_str(r#"id = "degenerate""#).unwrap();
        let err = run_config(&cfg).unwrap_err();
        assert!(matches!(err, Error::ClosedFormUnavailable { .. }), "{err:?}");
    }

    #[test]
    fn smoothed_run_carries_center_and_strength_to_the_potential() {
        let cfg = quadratic_config(
            SolverConfig::SmoothedAgda {
                stepsizes: StepSizeConfig::Explicit { tau1: 0.1, tau2: 0.1, p: 4.0, beta: 0.5 },
            },
            vec![MetricId::PotentialSmoothed],
            50,
        );
        let out = run_config(&cfg).unwrap();
        let vals: Vec<f64> = out
            .trace
            .rows
            .iter()
            .map(|r| r.values[0].parse().unwrap())
            .collect();
        // The smoothed potential decreases along the smoothed trajectory.
        assert!(vals.last().unwrap() < &vals[0]);
        // Exact on the quadratic family.
        assert!(out.trace.rows.iter().all(|r| r.values[1] == "1"));
    }

    #[test]
    fn catalyst_rows_are_outer_stages_with_cumulative_calls() {
        let cfg = quadratic_config(
            SolverConfig::CatalystAgda { gap_ratio: None, max_inner: 1_000_000, inner: None },
            vec![MetricId::GradPhi],
            4,
        );
        let out = run_config(&cfg).unwrap();
        assert_eq!(out.trace.rows.len(), 5);
        let calls: Vec<u64> = out.trace.rows.iter().map(|r| r.oracle_calls).collect();
        assert!(calls.windows(2).all(|w| w[0] < w[1]), "{calls:?}");
        let first: f64 = out.trace.rows[0].values[0].parse().unwrap();
        let last: f64 = out.trace.rows.last().unwrap().values[0].parse().unwrap();
        assert!(last < first * 0.5, "stages should contract the primal gradient");
    }

    #[test]
    fn same_seed_reproduces_the_trace_exactly() {
        let mut cfg = quadratic_config(agda(0.05, 0.1), vec![MetricId::GradF], 300);
        cfg.problem = ProblemConfig::Quadratic { a: 1.0, b: 1.0, c: 2.0, sigma: 1.0 };
        let a = run_config(&cfg).unwrap();
        let b = run_config(&cfg).unwrap();
        let ra: Vec<_> = a.trace.rows.iter().map(|r| &r.values).collect();
        let rb: Vec<_> = b.trace.rows.iter().map(|r| &r.values).collect();
        assert_eq!(ra, rb);
        let mut cfg2 = cfg.clone();
        cfg2.seed = 8;
        let c = run_config(&cfg2).unwrap();
        assert_ne!(
            a.trace.rows.last().unwrap().values,
            c.trace.rows.last().unwrap().values,
            "different seeds should produce different stochastic traces"
        );
    }

    #[test]
    fn warm_start_moves_only_y() {
        let mut cfg = quadratic_config(agda(0.1, 0.1), vec![MetricId::GradF], 0);
        cfg.warm_start_y = 25;
        let out = run_config(&cfg).unwrap();
        assert_eq!(out.final_point.x, vec![1.0]);
        // 25 ascent steps at 1/l from y=0 nearly solve max_y f(1, ·).
        let gy: f64 = out.trace.rows[0].values[1].parse().unwrap();
        assert!(gy < 1e-3, "grad_f_y after warm start: {gy}");
    }

    #[test]
    fn gradient_ascent_solver_runs_and_counts_single_calls() {
        let cfg = quadratic_config(
            SolverConfig::GradientAscent { tau: None },
            vec![MetricId::GradF],
            30,
        );
        let out = run_config(&cfg).unwrap();
        assert_eq!(out.oracle_calls, 30);
        assert_eq!(out.final_point.x, vec![1.0]);
        let gy: f64 = out.trace.rows.last().unwrap().values[1].parse().unwrap();
        assert!(gy < 1e-6);
    }
}
