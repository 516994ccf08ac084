//! Translation procedures between the two stationarity notions: given a
//! near-stationary point of the primal function Φ, produce a pair that is
//! near-stationary for f (and vice versa), with exact oracle-call
//! accounting.
//!
//! Preconditions on the inputs are checked but only *warned* about — the
//! mathematics degrades gracefully and callers routinely hand in
//! heuristically chosen iterates. Stopping certificates always use
//! deterministic measurements (closed forms where available), while the
//! `stochastic` flag controls whether the *dynamics* consume noisy
//! gradients.

use crate::linalg;
use crate::metrics::{self, StationarityReport};
use crate::problems::{ClosedFormKind, MinimaxProblem, Point};
use crate::rng::RngStream;
use crate::solvers::catalyst::anchored_grad;
use crate::{Error, Result, DIVERGENCE_LIMIT, ESTIMATION_BUDGET};

/// Outcome of a translation procedure: the produced point, the exact
/// number of (stochastic) gradient evaluations consumed by the dynamics,
/// and a stationarity certificate measured at the output.
#[derive(Debug, Clone)]
pub struct ConversionResult {
    pub point: Point,
    pub oracle_calls: u64,
    pub iterations: u64,
    pub certificate: StationarityReport,
    pub warnings: Vec<String>,
}

/// Translates an ε-stationary point of Φ into a pair near-stationary for
/// f by maximizing `f(x̂, ·)` at fixed x̂ until the primal gap
/// `Φ(x̂) − f(x̂, y)` drops below `ε²/(lκ)` (closed-form certificate when
/// available, PL surrogate `‖∇_y f‖²/(2μ)` otherwise). The returned pair
/// then satisfies `‖∇_y f‖ ≤ √2·ε` and `‖∇ₓf‖ ≤ (1+√2)·ε`.
///
/// Ascent stepsize: `1/l` deterministic, `min{1/l, ε²/(lκ²σ²)}`
/// stochastic (the unspecified scaling constant is fixed to 1).
pub fn to_f_stationary(
    problem: &MinimaxProblem,
    x_hat: &[f64],
    y_tilde: &[f64],
    eps: f64,
    eps_prime: f64,
    stochastic: bool,
    rng: &mut RngStream,
) -> Result<ConversionResult> {
    to_f_stationary_with_budget(
        problem,
        x_hat,
        y_tilde,
        eps,
        eps_prime,
        stochastic,
        rng,
        ESTIMATION_BUDGET,
    )
}

/// [`to_f_stationary`] with an explicit iteration budget.
#[allow(clippy::too_many_arguments)]
pub fn to_f_stationary_with_budget(
    problem: &MinimaxProblem,
    x_hat: &[f64],
    y_tilde: &[f64],
    eps: f64,
    eps_prime: f64,
    stochastic: bool,
    rng: &mut RngStream,
    budget: u64,
) -> Result<ConversionResult> {
    check_eps("ε", eps)?;
    check_eps("ε′", eps_prime)?;
    let mut point = checked_point(problem, x_hat, y_tilde)?;
    let mut warnings = Vec::new();

    let l = problem.smoothness_l();
    let kappa = problem.kappa();
    let (_, gy0) = problem.grad(&point)?;
    if linalg::norm(&gy0) > eps_prime * (1.0 + 1e-9) {
        warnings.push(format!(
            "input violates ‖∇_y f(x̂, ỹ)‖ ≤ ε′: {:.3e} > {eps_prime:.3e}; proceeding",
            linalg::norm(&gy0)
        ));
    }
    let phi_grad = metrics::grad_phi(problem, x_hat, eps * 1e-3)?;
    if phi_grad.value > eps * (1.0 + 1e-9) + phi_grad.tol {
        warnings.push(format!(
            "input violates ‖∇Φ(x̂)‖ ≤ ε: {:.3e} > {eps:.3e}; proceeding",
            phi_grad.value
        ));
    }

    let sigma = problem.noise_sigma();
    let tau = if stochastic && sigma > 0.0 {
        (1.0 / l).min(eps * eps / (l * kappa * kappa * sigma * sigma))
    } else {
        1.0 / l
    };
    let target = eps * eps / (l * kappa);
    let has_phi = problem.has_closed_form(ClosedFormKind::Phi);
    if !has_phi {
        warnings.push("gap certificate uses the PL surrogate ‖∇_y f‖²/(2μ)".into());
    }
    let two_mu = 2.0 * problem.pl_mu();

    let mut iterations = 0u64;
    let mut oracle_calls = 0u64;
    loop {
        let gap = if has_phi {
            problem.phi(&point.x)? - problem.value(&point)?
        } else {
            let (_, gy) = problem.grad(&point)?;
            linalg::norm_sq(&gy) / two_mu
        };
        if gap <= target {
            break;
        }
        if iterations >= budget {
            return Err(Error::NonConvergence {
                context: format!(
                    "ascent toward the f-stationarity gap target {target:.3e} stalled at \
                     gap {gap:.3e}"
                ),
                budget,
            });
        }
        let gy = if stochastic {
            problem.sample_grad_y(&point, rng)?
        } else {
            problem.grad(&point)?.1
        };
        oracle_calls += 1;
        linalg::axpy(tau, &gy, &mut point.y);
        if !linalg::within_limit(&point.y, DIVERGENCE_LIMIT) {
            return Err(Error::Diverged {
                iter: iterations,
                detail: "ascent phase of the f-stationarity translation".into(),
                last: Point::new(x_hat.to_vec(), y_tilde.to_vec()),
            });
        }
        iterations += 1;
    }

    let certificate = metrics::stationarity_report(problem, &point, eps * 1e-3, false)?;
    Ok(ConversionResult { point, oracle_calls, iterations, certificate, warnings })
}

/// Translates an (ε, ε/√κ)-stationary pair of f into a point
/// near-stationary for Φ by approximately solving the anchored problem
/// `min_x max_y f(x, y) + l‖x − x̃‖²` with alternating steps (y first)
/// until `‖x_k − x*‖ ≤ ε/(κl)` — certified against the closed-form
/// proximal point when available, otherwise through the anchored-gap
/// surrogate (flagged). The output satisfies `‖∇Φ(x̂)‖ ≤ (2√2+2)·ε`.
///
/// Stepsizes: `τ₁ = 1/(3l)`, `τ₂ = 1/(486l)` deterministic;
/// `τ₂ = min{1/(486l), ε²/(κ⁴lσ²)}`, `τ₁ = 162·τ₂` stochastic.
pub fn to_phi_stationary(
    problem: &MinimaxProblem,
    x_tilde: &[f64],
    y_tilde: &[f64],
    eps: f64,
    stochastic: bool,
    rng: &mut RngStream,
) -> Result<ConversionResult> {
    to_phi_stationary_with_budget(
        problem,
        x_tilde,
        y_tilde,
        eps,
        stochastic,
        rng,
        ESTIMATION_BUDGET,
    )
}

/// [`to_phi_stationary`] with an explicit iteration budget.
pub fn to_phi_stationary_with_budget(
    problem: &MinimaxProblem,
    x_tilde: &[f64],
    y_tilde: &[f64],
    eps: f64,
    stochastic: bool,
    rng: &mut RngStream,
    budget: u64,
) -> Result<ConversionResult> {
    check_eps("ε", eps)?;
    let mut point = checked_point(problem, x_tilde, y_tilde)?;
    let mut warnings = Vec::new();

    let l = problem.smoothness_l();
    let kappa = problem.kappa();
    let (gx0, gy0) = problem.grad(&point)?;
    if linalg::norm(&gx0) > eps * (1.0 + 1e-9) {
        warnings.push(format!(
            "input violates ‖∇ₓf‖ ≤ ε: {:.3e} > {eps:.3e}; proceeding",
            linalg::norm(&gx0)
        ));
    }
    if linalg::norm(&gy0) > eps / kappa.sqrt() * (1.0 + 1e-9) {
        warnings.push(format!(
            "input violates ‖∇_y f‖ ≤ ε/√κ: {:.3e} > {:.3e}; proceeding",
            linalg::norm(&gy0),
            eps / kappa.sqrt()
        ));
    }

    let sigma = problem.noise_sigma();
    let (tau1, tau2) = if stochastic && sigma > 0.0 {
        let t2 = (1.0 / (486.0 * l)).min(eps * eps / (kappa.powi(4) * l * sigma * sigma));
        (162.0 * t2, t2)
    } else {
        (1.0 / (3.0 * l), 1.0 / (486.0 * l))
    };
    let strength = 2.0 * l;
    let dist_target = eps / (kappa * l);
    // Closed-form certificate: distance to the proximal point of Φ at x̃.
    let prox = if problem.has_closed_form(ClosedFormKind::ProxPhi) {
        Some(problem.prox_phi(x_tilde, 1.0 / strength)?)
    } else {
        warnings.push(
            "stopping certificate uses the anchored surrogate gap (no closed-form prox)".into(),
        );
        None
    };
    // Via l-strong convexity of the anchored objective in x,
    // gap ≤ l·d²/2 certifies ‖x − x*‖ ≤ d.
    let gap_target = l * dist_target * dist_target / 2.0;

    let mut iterations = 0u64;
    let mut oracle_calls = 0u64;
    loop {
        let certified = match &prox {
            Some(p) => linalg::dist(&point.x, p) <= dist_target,
            None => {
                let grads = anchored_grad(problem, &point, x_tilde, strength)?;
                let (_, surrogate) = crate::solvers::catalyst::anchored_gap(
                    problem, &point, x_tilde, strength, &grads,
                )?;
                surrogate <= gap_target
            }
        };
        if certified {
            break;
        }
        if iterations >= budget {
            return Err(Error::NonConvergence {
                context: format!(
                    "anchored solve toward ‖x − x*‖ ≤ {dist_target:.3e} did not certify"
                ),
                budget,
            });
        }
        // y first, at the current x …
        let gy = if stochastic {
            problem.sample_grad_y(&point, rng)?
        } else {
            problem.grad(&point)?.1
        };
        linalg::axpy(tau2, &gy, &mut point.y);
        // … then x at the updated y, with the anchor pull.
        let mut gx = if stochastic {
            problem.sample_grad_x(&point, rng)?
        } else {
            problem.grad(&point)?.0
        };
        for i in 0..gx.len() {
            gx[i] += strength * (point.x[i] - x_tilde[i]);
        }
        linalg::axpy(-tau1, &gx, &mut point.x);
        oracle_calls += 2;
        if !(linalg::within_limit(&point.x, DIVERGENCE_LIMIT)
            && linalg::within_limit(&point.y, DIVERGENCE_LIMIT))
        {
            return Err(Error::Diverged {
                iter: iterations,
                detail: "anchored solve of the Φ-stationarity translation".into(),
                last: Point::new(x_tilde.to_vec(), y_tilde.to_vec()),
            });
        }
        iterations += 1;
    }

    let certificate = metrics::stationarity_report(problem, &point, eps * 1e-3, false)?;
    Ok(ConversionResult { point, oracle_calls, iterations, certificate, warnings })
}

fn check_eps(label: &str, eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{label} must be positive, got {eps}")))
    }
}

fn checked_point(problem: &MinimaxProblem, x: &[f64], y: &[f64]) -> Result<Point> {
    if x.len() != problem.dim_x() || y.len() != problem.dim_y() {
        return Err(Error::Config(format!(
            "point dimensions ({}, {}) do not match problem ({}, {})",
            x.len(),
            y.len(),
            problem.dim_x(),
            problem.dim_y()
        )));
    }
    let p = Point::new(x.to_vec(), y.to_vec());
    if !p.is_finite() {
        return Err(Error::Config("input point has non-finite entries".into()));
    }
    Ok(p)
}
