//! Python bindings for the minimax benchmark library.
//!
//! The module mirrors the core surface at problem/solver/metric
//! granularity: construct a [`Problem`], query its oracles and closed
//! forms, run the alternating or smoothed method on it, translate
//! stationarity certificates, and execute named presets. Vectors cross
//! the boundary as plain Python lists of floats; failures raise
//! `ValueError` with the library's error message.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use saddlebench::harness::{presets, run_config, run_sweep, PresetKind};
use saddlebench::problems::{MinimaxProblem, Point, QuadraticSaddle, RobustRegressionConfig};
use saddlebench::rng::{RngStream, StreamId};
use saddlebench::solvers::{
    self, smoothed_agda_step, stoc_agda_step, SolverState, StepSizes,
};
use saddlebench::{convert, metrics};

fn err(e: saddlebench::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

// --------------------------------------------------------------------
// Problems
// --------------------------------------------------------------------

/// A smooth nonconvex–PL minimax objective with declared constants.
#[pyclass(frozen)]
struct Problem {
    inner: MinimaxProblem,
}

impl Problem {
    fn point(&self, x: Vec<f64>, y: Vec<f64>) -> Point {
        Point::new(x, y)
    }
}

#[pymethods]
impl Problem {
    /// Scalar saddle `(a/2)x² + bxy − (c/2)y²` with oracle noise `sigma`.
    #[staticmethod]
    #[pyo3(signature = (a, b, c, sigma = 0.0))]
    fn quadratic(a: f64, b: f64, c: f64, sigma: f64) -> PyResult<Self> {
        let q = QuadraticSaddle::new(a, b, c).map_err(err)?;
        Ok(Problem { inner: MinimaxProblem::quadratic_saddle(q, sigma).map_err(err)? })
    }

    /// Multi-dimensional quadratic whose y-curvature is rank-deficient:
    /// PL without strong concavity.
    #[staticmethod]
    #[pyo3(signature = (dim_x, dim_y, rank, well_depth = 1.0, structure_seed = 11, sigma = 0.0))]
    fn degenerate(
        dim_x: usize,
        dim_y: usize,
        rank: usize,
        well_depth: f64,
        structure_seed: u64,
        sigma: f64,
    ) -> PyResult<Self> {
        Ok(Problem {
            inner: MinimaxProblem::degenerate_quadratic(
                dim_x,
                dim_y,
                rank,
                well_depth,
                structure_seed,
                sigma,
            )
            .map_err(err)?,
        })
    }

    /// GAN with a two-parameter Gaussian generator and a quadratic critic
    /// regularized by `lam`.
    #[staticmethod]
    #[pyo3(signature = (mu_hat = 0.0, sigma_hat = 0.1, lam = 1e-3, batch = 100, deterministic = true))]
    fn linear_wgan(
        mu_hat: f64,
        sigma_hat: f64,
        lam: f64,
        batch: usize,
        deterministic: bool,
    ) -> PyResult<Self> {
        Ok(Problem {
            inner: MinimaxProblem::linear_wgan_with(mu_hat, sigma_hat, lam, batch, deterministic)
                .map_err(err)?,
        })
    }

    /// GAN with a one-hidden-layer ReLU generator over a fixed latent
    /// sample.
    #[staticmethod]
    #[pyo3(signature = (hidden = 5, latents = 256, batch = 100, deterministic = true, structure_seed = 7))]
    fn neural_wgan(
        hidden: usize,
        latents: usize,
        batch: usize,
        deterministic: bool,
        structure_seed: u64,
    ) -> PyResult<Self> {
        Ok(Problem {
            inner: MinimaxProblem::neural_wgan(hidden, latents, batch, deterministic, structure_seed)
                .map_err(err)?,
        })
    }

    /// Two-hidden-layer ReLU regression against adversarially perturbed
    /// targets on a synthetic dataset.
    #[staticmethod]
    #[pyo3(signature = (n = 200, input_dim = 20, hidden1 = 16, hidden2 = 8, lam = 1.0,
                        data_noise = 0.1, data_seed = 1, batch = 32))]
    #[allow(clippy::too_many_arguments)]
    fn robust_regression(
        n: usize,
        input_dim: usize,
        hidden1: usize,
        hidden2: usize,
        lam: f64,
        data_noise: f64,
        data_seed: u64,
        batch: usize,
    ) -> PyResult<Self> {
        let cfg = RobustRegressionConfig {
            n,
            input_dim,
            hidden1,
            hidden2,
            lambda: lam,
            data_noise,
            data_seed,
            batch_size: batch,
        };
        Ok(Problem { inner: MinimaxProblem::robust_regression(cfg).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }

    #[getter]
    fn dim_y(&self) -> usize {
        self.inner.dim_y()
    }

    #[getter]
    fn smoothness(&self) -> f64 {
        self.inner.smoothness_l()
    }

    #[getter]
    fn pl_mu(&self) -> f64 {
        self.inner.pl_mu()
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa()
    }

    #[getter]
    fn noise_sigma(&self) -> f64 {
        self.inner.noise_sigma()
    }

    fn value(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        self.inner.value(&self.point(x, y)).map_err(err)
    }

    fn grad(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        self.inner.grad(&self.point(x, y)).map_err(err)
    }

    /// Central-difference gradient; an independent oracle for validation.
    fn finite_diff_grad(
        &self,
        x: Vec<f64>,
        y: Vec<f64>,
        h: f64,
    ) -> PyResult<(Vec<f64>, Vec<f64>)> {
        self.inner.finite_diff_grad(&self.point(x, y), h).map_err(err)
    }

    /// The primal function `Φ(x) = max_y f(x, y)` (closed form).
    fn phi(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.phi(&x).map_err(err)
    }

    /// Closed-form gradient of the primal function.
    fn grad_phi(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.grad_phi_exact(&x).map_err(err)
    }

    /// The maximizer `y*(x)` (closed form).
    fn y_star(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.y_star(&x).map_err(err)
    }

    /// Deterministic starting point derived from `seed`.
    fn default_init(&self, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let pt = self.inner.default_init(seed);
        (pt.x, pt.y)
    }

    /// This problem plus the proximal term `(strength/2)‖x − anchor‖²`
    /// (quadratic family only).
    fn anchored(&self, anchor: Vec<f64>, strength: f64) -> PyResult<Self> {
        Ok(Problem { inner: self.inner.anchored(&anchor, strength).map_err(err)? })
    }

    /// Proximal point of the primal function: argmin of
    /// `Φ(u) + (1/2λ)‖u − x‖²` (closed form required).
    fn prox_phi(&self, x: Vec<f64>, lam: f64) -> PyResult<Vec<f64>> {
        self.inner.prox_phi(&x, lam).map_err(err)
    }

    /// Distance from `x` to the nearest ReLU kink, or `None` when the
    /// objective is smooth in x everywhere.
    fn min_kink_distance(&self, x: Vec<f64>) -> PyResult<Option<f64>> {
        self.inner.min_kink_distance(&x).map_err(err)
    }
}

// --------------------------------------------------------------------
// Stepsizes and solver runs
// --------------------------------------------------------------------

/// Stepsizes of the alternating method's convergence analysis:
/// `(tau1, tau2)` for the given constants, noise scale, horizon, and
/// initial suboptimality.
#[pyfunction]
fn theorem1_stepsizes(l: f64, mu: f64, sigma: f64, horizon: u64, delta: f64) -> PyResult<(f64, f64)> {
    let s = solvers::theorem1_stepsizes(l, mu, sigma, horizon, delta).map_err(err)?;
    Ok((s.tau1, s.tau2))
}

/// Stepsizes `(tau1, tau2, p, beta)` of the smoothed method's analysis.
#[pyfunction]
fn theorem2_stepsizes(
    l: f64,
    mu: f64,
    sigma: f64,
    horizon: u64,
    delta: f64,
) -> PyResult<(f64, f64, f64, f64)> {
    let s = solvers::theorem2_stepsizes(l, mu, sigma, horizon, delta).map_err(err)?;
    Ok((s.tau1, s.tau2, s.p, s.beta))
}

fn resolve_start(problem: &MinimaxProblem, start: Option<(Vec<f64>, Vec<f64>)>, seed: u64) -> Point {
    match start {
        Some((x, y)) => Point::new(x, y),
        None => problem.default_init(seed),
    }
}

fn run_result<'py>(
    py: Python<'py>,
    state: &SolverState,
    iters: Vec<u64>,
    gx: Vec<f64>,
    gy: Vec<f64>,
    pot: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("x", state.point.x.clone())?;
    out.set_item("y", state.point.y.clone())?;
    out.set_item("oracle_calls", state.oracle_calls)?;
    out.set_item("iters", state.iter)?;
    out.set_item("sample_iters", iters)?;
    out.set_item("grad_f_x", gx)?;
    out.set_item("grad_f_y", gy)?;
    out.set_item("potential", pot)?;
    Ok(out)
}

/// Runs the alternating stochastic method for `iters` steps and returns
/// the final point plus gradient-norm and potential series sampled every
/// `cadence` iterations.
#[pyfunction]
#[pyo3(signature = (problem, iters, tau1, tau2, seed = 0, start = None, cadence = 1))]
#[allow(clippy::too_many_arguments)]
fn run_agda<'py>(
    py: Python<'py>,
    problem: &Problem,
    iters: u64,
    tau1: f64,
    tau2: f64,
    seed: u64,
    start: Option<(Vec<f64>, Vec<f64>)>,
    cadence: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = StepSizes::plain(tau1, tau2).map_err(err)?;
    let p = &problem.inner;
    let mut state =
        SolverState::new(p, resolve_start(p, start, seed), seed).map_err(err)?;
    let (mut si, mut gxs, mut gys, mut pots) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for k in 0..=iters {
        if k % cadence.max(1) == 0 || k == iters {
            let (gx, gy) = p.grad(&state.point).map_err(err)?;
            si.push(k);
            gxs.push(saddlebench::linalg::norm(&gx));
            gys.push(saddlebench::linalg::norm(&gy));
            pots.push(metrics::potential_agda(p, &state.point).map_err(err)?.value);
        }
        if k < iters {
            state = stoc_agda_step(p, state, &s).map_err(err)?;
        }
    }
    run_result(py, &state, si, gxs, gys, pots)
}

/// Runs the smoothed alternating method (proximal center `p`, averaging
/// weight `beta`); otherwise identical to `run_agda`.
#[pyfunction]
#[pyo3(signature = (problem, iters, tau1, tau2, p, beta, seed = 0, start = None, cadence = 1))]
#[allow(clippy::too_many_arguments)]
fn run_smoothed_agda<'py>(
    py: Python<'py>,
    problem: &Problem,
    iters: u64,
    tau1: f64,
    tau2: f64,
    p: f64,
    beta: f64,
    seed: u64,
    start: Option<(Vec<f64>, Vec<f64>)>,
    cadence: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = StepSizes::smoothed(tau1, tau2, p, beta).map_err(err)?;
    let prob = &problem.inner;
    let mut state = SolverState::new(prob, resolve_start(prob, start, seed), seed)
        .map_err(err)?
        .with_proximal_center();
    let (mut si, mut gxs, mut gys, mut pots) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for k in 0..=iters {
        if k % cadence.max(1) == 0 || k == iters {
            let (gx, gy) = prob.grad(&state.point).map_err(err)?;
            si.push(k);
            gxs.push(saddlebench::linalg::norm(&gx));
            gys.push(saddlebench::linalg::norm(&gy));
            pots.push(metrics::potential_agda(prob, &state.point).map_err(err)?.value);
        }
        if k < iters {
            state = smoothed_agda_step(prob, state, &s).map_err(err)?;
        }
    }
    run_result(py, &state, si, gxs, gys, pots)
}

// --------------------------------------------------------------------
// Metrics and translations
// --------------------------------------------------------------------

/// Descent potential `V = Φ(x) + (1/8)[Φ(x) − f(x, y)]`.
#[pyfunction]
fn potential_agda(problem: &Problem, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    Ok(metrics::potential_agda(&problem.inner, &Point::new(x, y)).map_err(err)?.value)
}

/// Moreau-envelope gradient norm `‖∇Φ_{1/2l}(x)‖`, exact when the
/// proximal map has a closed form.
#[pyfunction]
#[pyo3(signature = (problem, x, tol = 1e-6))]
fn moreau_grad(problem: &Problem, x: Vec<f64>, tol: f64) -> PyResult<f64> {
    Ok(metrics::moreau_grad(&problem.inner, &x, tol).map_err(err)?.value)
}

/// Full stationarity report at a point, as a dict of norms.
#[pyfunction]
#[pyo3(signature = (problem, x, y, tol = 1e-6, with_moreau = false))]
fn stationarity_report<'py>(
    py: Python<'py>,
    problem: &Problem,
    x: Vec<f64>,
    y: Vec<f64>,
    tol: f64,
    with_moreau: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let r = metrics::stationarity_report(&problem.inner, &Point::new(x, y), tol, with_moreau)
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("grad_f_x_norm", r.grad_f_x_norm)?;
    out.set_item("grad_f_y_norm", r.grad_f_y_norm)?;
    out.set_item("grad_phi_norm", r.grad_phi_norm.map(|v| v.value))?;
    out.set_item("moreau_grad_norm", r.moreau_grad_norm.map(|v| v.value))?;
    out.set_item("eps_pair", r.eps_pair)?;
    Ok(out)
}

fn conversion_dict<'py>(
    py: Python<'py>,
    res: convert::ConversionResult,
) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("x", res.point.x)?;
    out.set_item("y", res.point.y)?;
    out.set_item("oracle_calls", res.oracle_calls)?;
    out.set_item("iterations", res.iterations)?;
    out.set_item("grad_f_x_norm", res.certificate.grad_f_x_norm)?;
    out.set_item("grad_f_y_norm", res.certificate.grad_f_y_norm)?;
    out.set_item("grad_phi_norm", res.certificate.grad_phi_norm.map(|v| v.value))?;
    out.set_item("warnings", res.warnings)?;
    Ok(out)
}

/// Translates an ε-stationary point of `Φ` into a pair near-stationary
/// for `f` (certificate norms in the result).
#[pyfunction]
#[pyo3(signature = (problem, x, y, eps, eps_prime, stochastic = false, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn to_f_stationary<'py>(
    py: Python<'py>,
    problem: &Problem,
    x: Vec<f64>,
    y: Vec<f64>,
    eps: f64,
    eps_prime: f64,
    stochastic: bool,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let mut rng = RngStream::new(seed, StreamId::OracleY);
    let res = convert::to_f_stationary(&problem.inner, &x, &y, eps, eps_prime, stochastic, &mut rng)
        .map_err(err)?;
    conversion_dict(py, res)
}

/// Translates an (ε, ε/√κ)-stationary pair of `f` into a point
/// near-stationary for `Φ`.
#[pyfunction]
#[pyo3(signature = (problem, x, y, eps, stochastic = false, seed = 0))]
fn to_phi_stationary<'py>(
    py: Python<'py>,
    problem: &Problem,
    x: Vec<f64>,
    y: Vec<f64>,
    eps: f64,
    stochastic: bool,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let mut rng = RngStream::new(seed, StreamId::OracleY);
    let res = convert::to_phi_stationary(&problem.inner, &x, &y, eps, stochastic, &mut rng)
        .map_err(err)?;
    conversion_dict(py, res)
}

// --------------------------------------------------------------------
// Presets
// --------------------------------------------------------------------

/// Named reference configurations: list of (name, kind, summary).
#[pyfunction]
fn list_presets() -> Vec<(String, String, String)> {
    presets::all()
        .into_iter()
        .map(|p| (p.name.to_string(), p.kind.label().to_string(), p.summary.to_string()))
        .collect()
}

/// Executes a run preset in memory and returns its trace: column names
/// plus one row per sampled iteration.
#[pyfunction]
#[pyo3(signature = (name, seed = None, horizon = None))]
fn run_preset<'py>(
    py: Python<'py>,
    name: &str,
    seed: Option<u64>,
    horizon: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let preset = presets::all()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown preset '{name}'")))?;
    let mut cfg = match preset.kind {
        PresetKind::Run(c) => c,
        other => {
            return Err(PyValueError::new_err(format!(
                "'{name}' is a {} preset; run_preset only executes run presets \
                 (use run_sweep_preset or the command-line tool)",
                other.label()
            )))
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(h) = horizon {
        cfg.horizon = h;
    }
    cfg.output = None;
    let outcome = run_config(&cfg).map_err(err)?;

    let mut columns = vec!["iter".to_string(), "oracle_calls".to_string()];
    columns.extend(outcome.trace.columns.iter().cloned());
    let rows = PyList::empty(py);
    for row in &outcome.trace.rows {
        let mut vals = vec![row.iter as f64, row.oracle_calls as f64];
        for v in &row.values {
            vals.push(v.parse::<f64>().unwrap_or(f64::NAN));
        }
        rows.append(vals)?;
    }
    let out = PyDict::new(py);
    out.set_item("columns", columns)?;
    out.set_item("rows", rows)?;
    out.set_item("diverged", outcome.trace.diverged.clone())?;
    out.set_item("final_x", outcome.final_point.x)?;
    out.set_item("final_y", outcome.final_point.y)?;
    out.set_item("oracle_calls", outcome.oracle_calls)?;
    Ok(out)
}

/// Executes a sweep preset in memory and returns the per-cell summaries.
#[pyfunction]
#[pyo3(signature = (name, seeds = None))]
fn run_sweep_preset<'py>(py: Python<'py>, name: &str, seeds: Option<u64>) -> PyResult<Bound<'py, PyDict>> {
    let preset = presets::all()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown preset '{name}'")))?;
    let mut cfg = match preset.kind {
        PresetKind::Sweep(c) => c,
        other => {
            return Err(PyValueError::new_err(format!(
                "'{name}' is a {} preset; run_sweep_preset only executes sweeps",
                other.label()
            )))
        }
    };
    if let Some(s) = seeds {
        cfg.seeds = s;
    }
    cfg.output = None;
    let outcome = run_sweep(&cfg).map_err(err)?;

    let cells = PyList::empty(py);
    for s in &outcome.summaries {
        let cell = PyDict::new(py);
        cell.set_item("cell_index", s.cell_index)?;
        cell.set_item("tau1", s.params.tau1)?;
        cell.set_item("tau2", s.params.tau2)?;
        cell.set_item("beta", s.params.beta)?;
        cell.set_item("p", s.params.p)?;
        cell.set_item("n_ok", s.n_ok)?;
        cell.set_item("n_diverged", s.n_diverged)?;
        cell.set_item("hit_count", s.hit_count)?;
        cell.set_item("median_iters", s.median_iters)?;
        cell.set_item("mean_final", s.mean_final.clone())?;
        cells.append(cell)?;
    }
    let out = PyDict::new(py);
    out.set_item("columns", outcome.columns.clone())?;
    out.set_item("cells", cells)?;
    out.set_item(
        "best_cell_index",
        outcome.best_cell_by_median().map(|s| s.cell_index),
    )?;
    Ok(out)
}

// --------------------------------------------------------------------
// Module
// --------------------------------------------------------------------

#[pymodule]
fn saddlebench_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_function(wrap_pyfunction!(theorem1_stepsizes, m)?)?;
    m.add_function(wrap_pyfunction!(theorem2_stepsizes, m)?)?;
    m.add_function(wrap_pyfunction!(run_agda, m)?)?;
    m.add_function(wrap_pyfunction!(run_smoothed_agda, m)?)?;
    m.add_function(wrap_pyfunction!(potential_agda, m)?)?;
    m.add_function(wrap_pyfunction!(moreau_grad, m)?)?;
    m.add_function(wrap_pyfunction!(stationarity_report, m)?)?;
    m.add_function(wrap_pyfunction!(to_f_stationary, m)?)?;
    m.add_function(wrap_pyfunction!(to_phi_stationary, m)?)?;
    m.add_function(wrap_pyfunction!(list_presets, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep_preset, m)?)?;
    Ok(())
}
