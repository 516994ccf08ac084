//! Stationarity measures, Moreau-envelope gradients, duality-gap bounds,
//! and the potential functions that drive the convergence analyses.
//!
//! Every quantity that may be estimated rather than evaluated in closed
//! form is returned as an [`EstimatedValue`] carrying an exact/estimated
//! flag and the tolerance achieved, so downstream output never silently
//! mixes fidelities. Estimation paths cap their inner iterations at
//! [`crate::ESTIMATION_BUDGET`] and fail loudly instead of returning an
//! unflagged low-quality number.

use crate::linalg;
use crate::problems::{ClosedFormKind, MinimaxProblem, Point};
use crate::solvers::catalyst::{anchored_gap, anchored_grad};
use crate::{Error, Result, ESTIMATION_BUDGET};

/// Default tolerance for estimation paths triggered implicitly (no caller
/// tolerance in scope).
const DEFAULT_TOL: f64 = 1e-8;

/// A scalar that is either exact (closed form, `tol = 0`) or estimated to
/// a declared tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatedValue {
    pub value: f64,
    pub exact: bool,
    pub tol: f64,
}

impl EstimatedValue {
    pub fn exact(value: f64) -> Self {
        EstimatedValue { value, exact: true, tol: 0.0 }
    }

    pub fn estimated(value: f64, tol: f64) -> Self {
        EstimatedValue { value, exact: false, tol }
    }
}

/// Stationarity measures of one point: the two gradient-block norms (the
/// pair (ε₁, ε₂) the point certifies for f-stationarity), plus the primal
/// measures when computable.
#[derive(Debug, Clone)]
pub struct StationarityReport {
    pub grad_f_x_norm: f64,
    pub grad_f_y_norm: f64,
    pub grad_phi_norm: Option<EstimatedValue>,
    pub moreau_grad_norm: Option<EstimatedValue>,
    /// The (ε₁, ε₂) class this point certifies: ‖∇ₓf‖ ≤ ε₁, ‖∇_y f‖ ≤ ε₂.
    pub eps_pair: (f64, f64),
}

/// Duality gap of the anchored auxiliary objective `f + l‖x − anchor‖²`:
/// exact when closed forms exist, and a surrogate
/// `‖∇_y f̂‖²/(2μ) + ‖∇ₓ f̂‖²/(2l)` that upper bounds the exact gap for
/// every problem (strong convexity modulus l on the anchored x-block, PL
/// constant μ on the y-block).
#[derive(Debug, Clone, Copy)]
pub struct GapBound {
    pub exact: Option<f64>,
    pub surrogate: f64,
}

/// `‖∇Φ(x)‖` via the closed form `∇Φ(x) = ∇ₓf(x, y*(x))` when available,
/// otherwise estimated by deterministic inner ascent to within `tol`.
pub fn grad_phi(problem: &MinimaxProblem, x: &[f64], tol: f64) -> Result<EstimatedValue> {
    if problem.has_closed_form(ClosedFormKind::GradPhi) {
        let g = problem.grad_phi_exact(x)?;
        Ok(EstimatedValue::exact(linalg::norm(&g)))
    } else {
        grad_phi_estimated(problem, x, tol)
    }
}

/// Always-estimating variant of [`grad_phi`]: runs gradient ascent on
/// `f(x, ·)` until `‖∇_y f‖ ≤ tol·μ/(2l)`, at which point
/// `‖∇ₓf(x, y_k)‖` deviates from `‖∇Φ(x)‖` by at most `tol` (the error
/// bound `dist(y, argmax) ≤ ‖∇_y f‖/μ` times the cross-Lipschitz constant
/// l gives deviation ≤ tol/2).
pub fn grad_phi_estimated(
    problem: &MinimaxProblem,
    x: &[f64],
    tol: f64,
) -> Result<EstimatedValue> {
    check_tol(tol)?;
    let l = problem.smoothness_l();
    let target = tol * problem.pl_mu() / (2.0 * l);
    let mut point = Point::new(x.to_vec(), vec![0.0; problem.dim_y()]);
    for _ in 0..ESTIMATION_BUDGET {
        let (gx, gy) = problem.grad(&point)?;
        if linalg::norm(&gy) <= target {
            return Ok(EstimatedValue::estimated(linalg::norm(&gx), tol));
        }
        linalg::axpy(1.0 / l, &gy, &mut point.y);
    }
    Err(Error::NonConvergence {
        context: format!(
            "inner ascent for the primal gradient estimate did not reach \
             ‖∇_y f‖ ≤ {target:.3e}"
        ),
        budget: ESTIMATION_BUDGET,
    })
}

/// `‖∇Φ_λ(x)‖` with `λ = 1/(2l)`, i.e. `2l·‖x − prox_{λΦ}(x)‖`, via the
/// closed-form proximal map when available, otherwise by solving the
/// anchored saddle `min_x′ max_y f(x′, y) + l‖x′ − x‖²` to tolerance `tol`.
pub fn moreau_grad(problem: &MinimaxProblem, x: &[f64], tol: f64) -> Result<EstimatedValue> {
    if problem.has_closed_form(ClosedFormKind::ProxPhi) {
        let l = problem.smoothness_l();
        let prox = problem.prox_phi(x, 1.0 / (2.0 * l))?;
        Ok(EstimatedValue::exact(2.0 * l * linalg::dist(x, &prox)))
    } else {
        moreau_grad_estimated(problem, x, tol)
    }
}

/// Always-estimating variant of [`moreau_grad`]: solves the anchored
/// saddle until the x-block is within `tol/(2l)` of the proximal point
/// (certified through the anchored gap and strong convexity), so the
/// returned norm is within `tol` of the exact envelope gradient.
pub fn moreau_grad_estimated(
    problem: &MinimaxProblem,
    x: &[f64],
    tol: f64,
) -> Result<EstimatedValue> {
    check_tol(tol)?;
    let l = problem.smoothness_l();
    // ‖x̂ − prox‖ ≤ √(2·gap/μ₁) with μ₁ = l, so gap ≤ tol²/(8l) certifies
    // an x-error of tol/(2l) and a norm error of tol.
    let gap_tol = tol * tol / (8.0 * l);
    let (solved, _) = solve_anchored(problem, x, 2.0 * l, gap_tol, "Moreau-envelope gradient")?;
    Ok(EstimatedValue::estimated(2.0 * l * linalg::dist(x, &solved.x), tol))
}

/// Descent potential of the plain alternating method:
/// `V = Φ(x) + (1/8)[Φ(x) − f(x, y)]`; the bracket is nonnegative.
pub fn potential_agda(problem: &MinimaxProblem, point: &Point) -> Result<EstimatedValue> {
    let f = problem.value(point)?;
    let phi = phi_value(problem, &point.x, DEFAULT_TOL)?;
    Ok(EstimatedValue {
        value: phi.value + 0.125 * (phi.value - f),
        exact: phi.exact,
        tol: phi.tol * 1.125,
    })
}

/// Descent potential of the smoothed alternating method for proximal
/// center z and smoothing strength p:
/// `V = f̂(x, y; z) − 2Ψ̂(y; z) + 2P(z)` where `f̂ = f + (p/2)‖x − z‖²`,
/// `Ψ̂(·; z)` is its dual function and `P(z) = min_x Φ(x) + (p/2)‖x − z‖²`
/// (the Moreau envelope `Φ_{1/p}`). Exact on the scalar quadratic family,
/// estimated by nested deterministic solves otherwise.
pub fn potential_smoothed(
    problem: &MinimaxProblem,
    point: &Point,
    z: &[f64],
    p: f64,
) -> Result<EstimatedValue> {
    if z.len() != problem.dim_x() {
        return Err(Error::Config(format!(
            "proximal center length {} does not match dim_x = {}",
            z.len(),
            problem.dim_x()
        )));
    }
    if p <= problem.smoothness_l() {
        return Err(Error::Config(format!(
            "smoothing strength {p} must exceed the smoothness constant {} for the \
             auxiliary objective to be strongly convex",
            problem.smoothness_l()
        )));
    }
    let f_hat = problem.value(point)? + 0.5 * p * linalg::dist_sq(&point.x, z);
    if let Some(aq) = problem.affine_form() {
        let anchored = aq.anchored(z[0], p);
        let psi_hat = anchored.psi(point.y[0])?;
        let p_of_z = aq.moreau_phi(z[0], 1.0 / p)?;
        return Ok(EstimatedValue::exact(f_hat - 2.0 * psi_hat + 2.0 * p_of_z));
    }
    let tol = DEFAULT_TOL;
    let psi_hat = psi_hat_estimated(problem, &point.y, z, p, tol / 4.0)?;
    let p_of_z = envelope_value_estimated(problem, z, p, tol / 4.0)?;
    Ok(EstimatedValue::estimated(f_hat - 2.0 * psi_hat + 2.0 * p_of_z, tol))
}

/// Duality gap of the anchored objective `f + l‖x − anchor‖²` at `point`:
/// exact via closed forms when available, and the always-computable
/// surrogate upper bound.
pub fn gap_bound(problem: &MinimaxProblem, anchor: &[f64], point: &Point) -> Result<GapBound> {
    if anchor.len() != problem.dim_x() {
        return Err(Error::Config(format!(
            "anchor length {} does not match dim_x = {}",
            anchor.len(),
            problem.dim_x()
        )));
    }
    let p = 2.0 * problem.smoothness_l();
    let grads = anchored_grad(problem, point, anchor, p)?;
    let (exact, surrogate) = anchored_gap(problem, point, anchor, p, &grads)?;
    Ok(GapBound { exact, surrogate })
}

/// Full stationarity report at a point: both f-gradient block norms plus
/// the primal measures (`with_moreau` also computes the envelope gradient,
/// which may require an inner solve on problems without closed forms).
pub fn stationarity_report(
    problem: &MinimaxProblem,
    point: &Point,
    tol: f64,
    with_moreau: bool,
) -> Result<StationarityReport> {
    let (gx, gy) = problem.grad(point)?;
    let grad_f_x_norm = linalg::norm(&gx);
    let grad_f_y_norm = linalg::norm(&gy);
    let grad_phi_norm = Some(grad_phi(problem, &point.x, tol)?);
    let moreau_grad_norm =
        if with_moreau { Some(moreau_grad(problem, &point.x, tol)?) } else { None };
    Ok(StationarityReport {
        grad_f_x_norm,
        grad_f_y_norm,
        grad_phi_norm,
        moreau_grad_norm,
        eps_pair: (grad_f_x_norm, grad_f_y_norm),
    })
}

/// Φ(x) as an [`EstimatedValue`]: closed form when available, otherwise
/// inner ascent until the PL value bound `‖∇_y f‖²/(2μ) ≤ tol` certifies
/// the estimate.
pub fn phi_value(problem: &MinimaxProblem, x: &[f64], tol: f64) -> Result<EstimatedValue> {
    if problem.has_closed_form(ClosedFormKind::Phi) {
        return Ok(EstimatedValue::exact(problem.phi(x)?));
    }
    check_tol(tol)?;
    let l = problem.smoothness_l();
    let two_mu = 2.0 * problem.pl_mu();
    let mut point = Point::new(x.to_vec(), vec![0.0; problem.dim_y()]);
    for _ in 0..ESTIMATION_BUDGET {
        let (_, gy) = problem.grad(&point)?;
        if linalg::norm_sq(&gy) / two_mu <= tol {
            return Ok(EstimatedValue::estimated(problem.value(&point)?, tol));
        }
        linalg::axpy(1.0 / l, &gy, &mut point.y);
    }
    Err(Error::NonConvergence {
        context: "inner ascent for the primal value estimate".into(),
        budget: ESTIMATION_BUDGET,
    })
}

/// Solves the anchored saddle `min_x max_y f(x, y) + (p/2)‖x − anchor‖²`
/// with deterministic alternating steps (y first) down to surrogate gap
/// ≤ `gap_tol`; returns the solution and the iterations spent.
pub(crate) fn solve_anchored(
    problem: &MinimaxProblem,
    anchor: &[f64],
    p: f64,
    gap_tol: f64,
    context: &str,
) -> Result<(Point, u64)> {
    let l = problem.smoothness_l();
    let mu1 = p - l;
    if mu1 <= 0.0 {
        return Err(Error::Config(format!(
            "anchor strength {p} must exceed the smoothness constant {l}"
        )));
    }
    // Worst-case two-sided-PL stepsizes for the anchored objective
    // (smoothness ≤ l + p, x-strong-convexity ≥ p − l).
    let l_hat = l + p;
    let tau1 = 1.0 / l_hat;
    let tau2 = mu1 * mu1 / (18.0 * l_hat * l_hat * l_hat);
    let mut point = Point::new(anchor.to_vec(), vec![0.0; problem.dim_y()]);
    for k in 0..ESTIMATION_BUDGET {
        let grads = anchored_grad(problem, &point, anchor, p)?;
        let (_, surrogate) = anchored_gap(problem, &point, anchor, p, &grads)?;
        if surrogate <= gap_tol {
            return Ok((point, k));
        }
        linalg::axpy(tau2, &grads.1, &mut point.y);
        let (gx, _) = anchored_grad(problem, &point, anchor, p)?;
        linalg::axpy(-tau1, &gx, &mut point.x);
    }
    Err(Error::NonConvergence {
        context: format!("anchored inner solve for the {context} did not reach gap {gap_tol:.3e}"),
        budget: ESTIMATION_BUDGET,
    })
}

/// Estimates `Ψ̂(y; z) = min_x f(x, y) + (p/2)‖x − z‖²` by gradient
/// descent on the strongly convex x-block; the PL value bound
/// `‖∇ₓf̂‖²/(2μ₁) ≤ tol` certifies the estimate.
fn psi_hat_estimated(
    problem: &MinimaxProblem,
    y: &[f64],
    z: &[f64],
    p: f64,
    tol: f64,
) -> Result<f64> {
    let l = problem.smoothness_l();
    let mu1 = p - l;
    let tau = 1.0 / (l + p);
    let mut point = Point::new(z.to_vec(), y.to_vec());
    for _ in 0..ESTIMATION_BUDGET {
        let (gx, _) = anchored_grad(problem, &point, z, p)?;
        if linalg::norm_sq(&gx) / (2.0 * mu1) <= tol {
            return Ok(problem.value(&point)? + 0.5 * p * linalg::dist_sq(&point.x, z));
        }
        linalg::axpy(-tau, &gx, &mut point.x);
    }
    Err(Error::NonConvergence {
        context: "x-block descent for the auxiliary dual value".into(),
        budget: ESTIMATION_BUDGET,
    })
}

/// Estimates the envelope value `P(z) = min_x Φ(x) + (p/2)‖x − z‖²` by an
/// anchored saddle solve; the anchored gap bounds the value error.
fn envelope_value_estimated(
    problem: &MinimaxProblem,
    z: &[f64],
    p: f64,
    tol: f64,
) -> Result<f64> {
    let (point, _) = solve_anchored(problem, z, p, tol, "envelope value")?;
    let phi = phi_value(problem, &point.x, tol)?;
    Ok(phi.value + 0.5 * p * linalg::dist_sq(&point.x, z))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("tolerance must be positive, got {tol}")))
    }
}
