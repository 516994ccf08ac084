//! Declarative run/sweep configuration: a TOML tree that fully determines
//! an experiment — problem, solver, stepsizes, horizon, seed, metrics,
//! cadence. Identical configs with identical seeds yield byte-identical
//! trace files.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::problems::{MinimaxProblem, Point, RobustRegressionConfig};
use crate::solvers::{self, StepSizes};
use crate::{Error, Result};

/// Problem selection by string id plus parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Scalar quadratic saddle (a/2)x² + bxy − (c/2)y².
    Quadratic {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default)]
        sigma: f64,
    },
    /// Full affine-quadratic family with linear terms.
    Affine {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        e: f64,
        f0: f64,
        #[serde(default)]
        sigma: f64,
    },
    /// Rank-deficient y-block quadratic with a nonconvex x-well.
    Degenerate {
        #[serde(default = "defaults::dim_x")]
        dim_x: usize,
        #[serde(default = "defaults::dim_y")]
        dim_y: usize,
        #[serde(default = "defaults::rank")]
        rank: usize,
        #[serde(default = "defaults::well_depth")]
        well_depth: f64,
        #[serde(default = "defaults::structure_seed")]
        structure_seed: u64,
        #[serde(default)]
        sigma: f64,
    },
    /// Gaussian-data WGAN with a linear generator and quadratic critic.
    WganLinear {
        #[serde(default)]
        mu_hat: f64,
        #[serde(default = "defaults::sigma_hat")]
        sigma_hat: f64,
        #[serde(default = "defaults::lambda")]
        lambda: f64,
        #[serde(default = "defaults::batch")]
        batch_size: usize,
        #[serde(default)]
        deterministic: bool,
    },
    /// WGAN variant with a one-hidden-layer ReLU generator.
    WganNeural {
        #[serde(default = "defaults::hidden")]
        hidden: usize,
        #[serde(default = "defaults::latent_count")]
        latent_count: usize,
        #[serde(default = "defaults::batch")]
        batch_size: usize,
        #[serde(default)]
        deterministic: bool,
        #[serde(default = "defaults::structure_seed")]
        structure_seed: u64,
    },
    /// Robust regression with a small MLP and per-sample target shifts.
    Robust {
        #[serde(default = "defaults::robust_n")]
        n: usize,
        #[serde(default = "defaults::robust_input_dim")]
        input_dim: usize,
        #[serde(default = "defaults::robust_hidden1")]
        hidden1: usize,
        #[serde(default = "defaults::robust_hidden2")]
        hidden2: usize,
        #[serde(default = "defaults::robust_lambda")]
        lambda: f64,
        #[serde(default = "defaults::robust_noise")]
        data_noise: f64,
        #[serde(default = "defaults::robust_seed")]
        data_seed: u64,
        #[serde(default = "defaults::robust_batch")]
        batch_size: usize,
        /// Optional CSV (header row, float columns, last column = target)
        /// replacing the synthetic dataset.
        #[serde(default)]
        data_file: Option<PathBuf>,
    },
}

mod defaults {
    pub fn dim_x() -> usize {
        3
    }
    pub fn dim_y() -> usize {
        4
    }
    pub fn rank() -> usize {
        2
    }
    pub fn well_depth() -> f64 {
        1.0
    }
    pub fn structure_seed() -> u64 {
        11
    }
    pub fn sigma_hat() -> f64 {
        0.1
    }
    pub fn lambda() -> f64 {
        1e-3
    }
    pub fn batch() -> usize {
        100
    }
    pub fn hidden() -> usize {
        5
    }
    pub fn latent_count() -> usize {
        256
    }
    pub fn robust_n() -> usize {
        200
    }
    pub fn robust_input_dim() -> usize {
        20
    }
    pub fn robust_hidden1() -> usize {
        16
    }
    pub fn robust_hidden2() -> usize {
        8
    }
    pub fn robust_lambda() -> f64 {
        1.0
    }
    pub fn robust_noise() -> f64 {
        0.1
    }
    pub fn robust_seed() -> u64 {
        1
    }
    pub fn robust_batch() -> usize {
        32
    }
}

impl ProblemConfig {
    pub fn build(&self) -> Result<MinimaxProblem> {
        match self {
            ProblemConfig::Quadratic { a, b, c, sigma } => MinimaxProblem::quadratic_saddle(
                crate::problems::QuadraticSaddle::new(*a, *b, *c)?,
                *sigma,
            ),
            ProblemConfig::Affine { a, b, c, d, e, f0, sigma } => {
                let aq = crate::problems::AffineQuadratic {
                    a: *a,
                    b: *b,
                    c: *c,
                    d: *d,
                    e: *e,
                    f0: *f0,
                };
                MinimaxProblem::affine_quadratic(aq, *sigma)
            }
            ProblemConfig::Degenerate { dim_x, dim_y, rank, well_depth, structure_seed, sigma } => {
                MinimaxProblem::degenerate_quadratic(
                    *dim_x,
                    *dim_y,
                    *rank,
                    *well_depth,
                    *structure_seed,
                    *sigma,
                )
            }
            ProblemConfig::WganLinear { mu_hat, sigma_hat, lambda, batch_size, deterministic } => {
                MinimaxProblem::linear_wgan_with(
                    *mu_hat,
                    *sigma_hat,
                    *lambda,
                    *batch_size,
                    *deterministic,
                )
            }
            ProblemConfig::WganNeural {
                hidden,
                latent_count,
                batch_size,
                deterministic,
                structure_seed,
            } => MinimaxProblem::neural_wgan(
                *hidden,
                *latent_count,
                *batch_size,
                *deterministic,
                *structure_seed,
            ),
            ProblemConfig::Robust {
                n,
                input_dim,
                hidden1,
                hidden2,
                lambda,
                data_noise,
                data_seed,
                batch_size,
                data_file,
            } => {
                let mut cfg = RobustRegressionConfig {
                    n: *n,
                    input_dim: *input_dim,
                    hidden1: *hidden1,
                    hidden2: *hidden2,
                    lambda: *lambda,
                    data_noise: *data_noise,
                    data_seed: *data_seed,
                    batch_size: *batch_size,
                };
                match data_file {
                    None => MinimaxProblem::robust_regression(cfg),
                    Some(path) => {
                        // The file's shape wins over the n/input_dim fields.
                        let (features, targets, width) = load_regression_csv(path)?;
                        cfg.n = targets.len();
                        cfg.input_dim = width;
                        MinimaxProblem::robust_regression_with_data(features, targets, cfg)
                    }
                }
            }
        }
    }
}

/// Solver selection by string id.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SolverConfig {
    Agda {
        stepsizes: StepSizeConfig,
    },
    Gda {
        stepsizes: StepSizeConfig,
    },
    SmoothedAgda {
        stepsizes: StepSizeConfig,
    },
    CatalystAgda {
        /// Relative-gap stopping factor; default 1/(264κ⁴).
        #[serde(default)]
        gap_ratio: Option<f64>,
        #[serde(default = "default_max_inner")]
        max_inner: u64,
        /// Inner stepsizes; default τ₁ = 1/(3l), τ₂ = 1/(486l), p = 2l.
        #[serde(default)]
        inner: Option<StepSizeConfig>,
    },
    Adam {
        lr: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_adaptive_eps")]
        eps: f64,
    },
    Rmsprop {
        lr: f64,
        #[serde(default = "default_decay")]
        decay: f64,
        #[serde(default = "default_adaptive_eps")]
        eps: f64,
    },
    GradientAscent {
        /// Ascent stepsize; default 1/l.
        #[serde(default)]
        tau: Option<f64>,
    },
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_decay() -> f64 {
    0.99
}
fn default_adaptive_eps() -> f64 {
    1e-8
}
fn default_max_inner() -> u64 {
    crate::INNER_SOLVE_BUDGET
}

/// Stepsizes: explicit values or a theorem constructor fed by the
/// problem's declared constants.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StepSizeConfig {
    Explicit {
        tau1: f64,
        tau2: f64,
        #[serde(default)]
        p: f64,
        #[serde(default = "default_beta")]
        beta: f64,
    },
    /// Alternating-method theorem stepsizes from (l, μ, σ, T, Δ).
    Theorem1 {
        /// Iteration budget; defaults to the run horizon.
        #[serde(default)]
        horizon: Option<u64>,
        /// Initial suboptimality Φ(x₀) − Φ*; computed from closed forms
        /// when omitted.
        #[serde(default)]
        delta: Option<f64>,
    },
    /// Smoothed-method theorem stepsizes from the same inputs.
    Theorem2 {
        #[serde(default)]
        horizon: Option<u64>,
        #[serde(default)]
        delta: Option<f64>,
    },
}

fn default_beta() -> f64 {
    1.0
}

impl StepSizeConfig {
    /// Resolves to concrete stepsizes for `problem`, using `run_horizon`
    /// and the starting point for the theorem constructors' T and Δ.
    pub fn build(
        &self,
        problem: &MinimaxProblem,
        run_horizon: u64,
        start: &Point,
    ) -> Result<StepSizes> {
        match self {
            StepSizeConfig::Explicit { tau1, tau2, p, beta } => {
                StepSizes::smoothed(*tau1, *tau2, *p, *beta)
            }
            StepSizeConfig::Theorem1 { horizon, delta } => {
                let t = horizon.unwrap_or(run_horizon);
                let d = resolve_delta(problem, start, *delta)?;
                solvers::theorem1_stepsizes(
                    problem.smoothness_l(),
                    problem.pl_mu(),
                    problem.noise_sigma(),
                    t,
                    d,
                )
            }
            StepSizeConfig::Theorem2 { horizon, delta } => {
                let t = horizon.unwrap_or(run_horizon);
                let d = resolve_delta(problem, start, *delta)?;
                solvers::theorem2_stepsizes(
                    problem.smoothness_l(),
                    problem.pl_mu(),
                    problem.noise_sigma(),
                    t,
                    d,
                )
            }
        }
    }
}

fn resolve_delta(problem: &MinimaxProblem, start: &Point, explicit: Option<f64>) -> Result<f64> {
    if let Some(d) = explicit {
        return Ok(d);
    }
    let phi0 = problem.phi(&start.x).map_err(|_| {
        Error::Config(
            "theorem stepsizes need `delta` (initial suboptimality) because the problem \
             has no closed-form primal value"
                .into(),
        )
    })?;
    let phi_star = problem.phi_star().map_err(|_| {
        Error::Config(
            "theorem stepsizes need `delta` (initial suboptimality) because the problem \
             has no closed-form primal minimum"
                .into(),
        )
    })?;
    Ok(phi0 - phi_star)
}

/// Metric selection by string id.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum MetricId {
    /// Both f-gradient block norms.
    GradF,
    /// ‖∇Φ(x)‖, exact or estimated (flag column).
    GradPhi,
    /// Moreau-envelope gradient norm ‖∇Φ_{1/2l}(x)‖.
    Moreau,
    /// V = Φ + (1/8)(Φ − f).
    PotentialAgda,
    /// V = f̂ − 2Ψ̂ + 2P for the smoothed method (requires a proximal
    /// center, i.e. the smoothed-agda solver).
    PotentialSmoothed,
    /// Anchored duality gap at the run's starting x (exact + surrogate).
    Gap,
    /// Distance to the known optimum (problems that declare one).
    DistToOpt,
}

impl MetricId {
    /// Column names this metric contributes to the trace.
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            MetricId::GradF => &["grad_f_x", "grad_f_y"],
            MetricId::GradPhi => &["grad_phi", "grad_phi_exact"],
            MetricId::Moreau => &["moreau_grad", "moreau_grad_exact"],
            MetricId::PotentialAgda => &["potential_agda", "potential_agda_exact"],
            MetricId::PotentialSmoothed => &["potential_smoothed", "potential_smoothed_exact"],
            MetricId::Gap => &["gap_exact", "gap_surrogate"],
            MetricId::DistToOpt => &["dist_to_opt"],
        }
    }
}

/// One fully specified experiment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub solver: SolverConfig,
    /// Solver iterations (the trace also contains an iteration-0 row).
    pub horizon: u64,
    pub seed: u64,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricId>,
    /// Sample metrics every `cadence` iterations.
    #[serde(default = "default_cadence")]
    pub cadence: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Add a wall-clock column (breaks byte-determinism; off by default).
    #[serde(default)]
    pub timing: bool,
    /// Override the problem's default starting point.
    #[serde(default)]
    pub start_x: Option<Vec<f64>>,
    #[serde(default)]
    pub start_y: Option<Vec<f64>>,
    /// Ascent steps on y (stepsize 1/l) before the main loop; 0 = off.
    #[serde(default)]
    pub warm_start_y: u64,
    /// Tolerance for estimated metric values.
    #[serde(default = "default_metric_tol")]
    pub metric_tol: f64,
}

fn default_metrics() -> Vec<MetricId> {
    vec![MetricId::GradF]
}
fn default_cadence() -> u64 {
    1
}
fn default_metric_tol() -> f64 {
    1e-6
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        load_toml(path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cadence == 0 {
            return Err(Error::Config("cadence must be at least 1".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::Config("at least one metric is required".into()));
        }
        if !(self.metric_tol.is_finite() && self.metric_tol > 0.0) {
            return Err(Error::Config(format!(
                "metric tolerance must be positive, got {}",
                self.metric_tol
            )));
        }
        let smoothed = matches!(self.solver, SolverConfig::SmoothedAgda { .. });
        if self.metrics.contains(&MetricId::PotentialSmoothed) && !smoothed {
            return Err(Error::Config(
                "the potential-smoothed metric needs a proximal center and is only \
                 available with the smoothed-agda solver"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Threshold clock for sweeps: the first iteration at which `metric`'s
/// value column drops below `value`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub metric: MetricId,
    pub value: f64,
}

/// A cartesian stepsize/seed grid around a base run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub tau1: Vec<f64>,
    pub tau2: Vec<f64>,
    /// Empty = keep the base solver's values.
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub p: Vec<f64>,
    /// Seeds per cell, derived from the base seed by stable hashing.
    pub seeds: u64,
    #[serde(default)]
    pub threshold: Option<ThresholdConfig>,
    /// Base path; the sweep writes `<output>_cells.csv` and
    /// `<output>_summary.csv`.
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        load_toml(path)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.tau1.is_empty() || self.tau2.is_empty() {
            return Err(Error::Config("sweep grids tau1 and tau2 must be non-empty".into()));
        }
        if self.seeds == 0 {
            return Err(Error::Config("sweep needs at least one seed".into()));
        }
        match &self.base.solver {
            SolverConfig::Agda { .. } | SolverConfig::Gda { .. }
            | SolverConfig::SmoothedAgda { .. } => Ok(()),
            other => Err(Error::Config(format!(
                "sweeps grid over stepsizes and support the agda/gda/smoothed-agda \
                 solvers, not {other:?}"
            ))),
        }
    }
}

/// Loads and parses a TOML config, surfacing the parser's line/column
/// diagnostics on failure.
pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| Error::Config(format!("in {}: {e}", path.display())))
}

/// Parses a regression CSV: one header row, float columns, last column is
/// the target. Returns row-major features, targets, and the feature width.
fn load_regression_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
    let mut features = Vec::new();
    let mut targets = Vec::new();
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty data file", path.display())))?;
    let width = header.1.split(',').count();
    if width < 2 {
        return Err(Error::Config(format!(
            "{}: need at least one feature column and one target column",
            path.display()
        )));
    }
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(width);
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "{}:{}: `{field}` is not a number",
                    path.display(),
                    lineno + 1
                ))
            })?;
            row.push(v);
        }
        if row.len() != width {
            return Err(Error::Config(format!(
                "{}:{}: expected {width} columns, found {}",
                path.display(),
                lineno + 1,
                row.len()
            )));
        }
        targets.push(row.pop().expect("width ≥ 2"));
        features.extend_from_slice(&row);
    }
    Ok((features, targets, width - 1))
}
