//! Inexact proximal-point wrapper: each outer stage anchors a strongly
//! convex quadratic at the current x and solves the resulting
//! strongly-convex–PL saddle with deterministic alternating steps (y
//! first), stopping once the anchored duality gap has shrunk by a
//! configured factor.

use crate::linalg;
use crate::problems::{MinimaxProblem, Point};
use crate::solvers::StepSizes;
use crate::{Error, Result, DIVERGENCE_LIMIT, INNER_SOLVE_BUDGET};

/// Relative-gap stopping rule for the anchored inner solves: terminate a
/// stage once `gap(x_k, y_k) ≤ gap_ratio · gap(x_0, y_0)`, erroring out if
/// that takes more than `max_inner` iterations.
#[derive(Debug, Clone, Copy)]
pub struct StoppingRule {
    pub gap_ratio: f64,
    pub max_inner: u64,
}

impl StoppingRule {
    pub fn new(gap_ratio: f64, max_inner: u64) -> Result<Self> {
        if !(gap_ratio.is_finite() && gap_ratio > 0.0 && gap_ratio < 1.0) {
            return Err(Error::Config(format!(
                "stopping ratio must lie in (0, 1), got {gap_ratio}"
            )));
        }
        if max_inner == 0 {
            return Err(Error::Config("inner iteration budget must be positive".into()));
        }
        Ok(StoppingRule { gap_ratio, max_inner })
    }

    /// The convergence theorem's stopping factor `1/(264κ⁴)` with the
    /// default inner budget.
    pub fn theorem_default(kappa: f64) -> Result<Self> {
        Self::new(catalyst_stop_factor(kappa)?, INNER_SOLVE_BUDGET)
    }
}

/// Stopping factor `1/(264κ⁴)` used by the outer convergence theorem.
pub fn catalyst_stop_factor(kappa: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa >= 1.0) {
        return Err(Error::Config(format!("condition number must be ≥ 1, got {kappa}")));
    }
    Ok(1.0 / (264.0 * kappa.powi(4)))
}

/// Default inner stepsizes `τ₁ = 1/(3l)`, `τ₂ = 1/(486l)` with anchor
/// strength `p = 2l`: the two-sided-PL stepsizes under the worst-case
/// constants of the anchored objective (smoothness ≤ 3l, x-strong-convexity
/// ≥ l).
pub fn catalyst_inner_stepsizes(l: f64) -> Result<StepSizes> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::Config(format!("smoothness constant must be positive, got {l}")));
    }
    StepSizes::smoothed(1.0 / (3.0 * l), 1.0 / (486.0 * l), 2.0 * l, 1.0)
}

/// One outer stage of the proximal-point run.
#[derive(Debug, Clone)]
pub struct CatalystOuterRecord {
    pub outer_index: u64,
    /// Anchor of this stage's subproblem (the x entering the stage).
    pub anchor: Vec<f64>,
    /// Inner iterations spent to satisfy the stopping rule.
    pub inner_iters: u64,
    /// Anchored duality gap at the stage's start.
    pub initial_gap: f64,
    /// Anchored duality gap when the stopping rule fired.
    pub final_gap: f64,
    /// Iterate after the stage.
    pub point: Point,
    /// Cumulative gradient evaluations over the whole run so far.
    pub oracle_calls: u64,
}

/// Full trace of a proximal-point run.
#[derive(Debug, Clone)]
pub struct CatalystTrace {
    pub outers: Vec<CatalystOuterRecord>,
    pub final_point: Point,
    pub total_oracle_calls: u64,
}

/// Gradient of the anchored objective `f(x, y) + (p/2)‖x − anchor‖²`.
pub(crate) fn anchored_grad(
    problem: &MinimaxProblem,
    point: &Point,
    anchor: &[f64],
    p: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut gx, gy) = problem.grad(point)?;
    for i in 0..gx.len() {
        gx[i] += p * (point.x[i] - anchor[i]);
    }
    Ok((gx, gy))
}

/// Duality gap of the anchored objective at `point`: the exact gap
/// `Φ̂(x) − Ψ̂(y)` when closed forms exist, plus a surrogate that upper
/// bounds it for every problem, derived from the PL inequality on the
/// y-block and strong convexity on the anchored x-block:
/// `‖∇_y f‖²/(2μ) + ‖∇ₓ f̂‖²/(2μ₁)` with the worst-case modulus
/// `μ₁ = p − l` (an l-smooth objective is at most l-weakly convex in x).
pub(crate) fn anchored_gap(
    problem: &MinimaxProblem,
    point: &Point,
    anchor: &[f64],
    p: f64,
    grads: &(Vec<f64>, Vec<f64>),
) -> Result<(Option<f64>, f64)> {
    let mu1 = p - problem.smoothness_l();
    if mu1 <= 0.0 {
        return Err(Error::Config(format!(
            "anchor strength {p} does not dominate the smoothness constant {}",
            problem.smoothness_l()
        )));
    }
    let (gx, gy) = grads;
    let surrogate = linalg::norm_sq(gy) / (2.0 * problem.pl_mu())
        + linalg::norm_sq(gx) / (2.0 * mu1);
    let exact = match problem.affine_form() {
        Some(aq) => {
            let hat = aq.anchored(anchor[0], p);
            Some(hat.gap(point.x[0], point.y[0])?)
        }
        None => None,
    };
    if !surrogate.is_finite() {
        return Err(Error::Numeric {
            context: "anchored duality gap".into(),
            detail: "gap evaluation produced a non-finite value".into(),
        });
    }
    Ok((exact, surrogate))
}

/// Runs `outer_t` proximal-point stages from `start`. Each stage anchors
/// `f + (p/2)‖x − x_t‖²` at the current x (strength `inner_s.p`, normally
/// `2l`) and solves it with deterministic alternating steps — the y-block
/// moves first, then the x-block at the updated y — until the anchored gap
/// satisfies `stop`. Stages warm-start from the previous iterate; the
/// stopping rule is checked before the first inner step, so a stage that
/// starts at its subproblem's saddle spends zero iterations.
pub fn catalyst_agda_run(
    problem: &MinimaxProblem,
    start: Point,
    outer_t: u64,
    stop: &StoppingRule,
    inner_s: &StepSizes,
) -> Result<CatalystTrace> {
    if outer_t == 0 {
        return Err(Error::Config("outer stage count must be positive".into()));
    }
    if inner_s.p <= 0.0 {
        return Err(Error::Config(
            "proximal-point stages require a positive anchor strength".into(),
        ));
    }
    StoppingRule::new(stop.gap_ratio, stop.max_inner)?;
    if start.x.len() != problem.dim_x() || start.y.len() != problem.dim_y() {
        return Err(Error::Config(format!(
            "start dimensions ({}, {}) do not match problem ({}, {})",
            start.x.len(),
            start.y.len(),
            problem.dim_x(),
            problem.dim_y()
        )));
    }

    let mut point = start;
    let mut outers = Vec::with_capacity(outer_t as usize);
    let mut oracle_calls: u64 = 0;

    for outer_index in 0..outer_t {
        let anchor = point.x.clone();
        let mut grads = anchored_grad(problem, &point, &anchor, inner_s.p)?;
        oracle_calls += 1;
        let (exact0, surrogate0) = anchored_gap(problem, &point, &anchor, inner_s.p, &grads)?;
        let gap0 = exact0.unwrap_or(surrogate0);
        let mut gap = gap0;
        let mut inner_iters: u64 = 0;

        while gap > stop.gap_ratio * gap0 {
            if inner_iters >= stop.max_inner {
                return Err(Error::NonConvergence {
                    context: format!(
                        "inner solve of outer stage {outer_index} reached gap ratio {:.3e} \
                         (target {:.3e})",
                        gap / gap0,
                        stop.gap_ratio
                    ),
                    budget: stop.max_inner,
                });
            }
            // y first, at the current x …
            linalg::axpy(inner_s.tau2, &grads.1, &mut point.y);
            // … then x at the updated y.
            let (gx, _) = anchored_grad(problem, &point, &anchor, inner_s.p)?;
            oracle_calls += 1;
            linalg::axpy(-inner_s.tau1, &gx, &mut point.x);
            if !(linalg::within_limit(&point.x, DIVERGENCE_LIMIT)
                && linalg::within_limit(&point.y, DIVERGENCE_LIMIT))
            {
                return Err(Error::Diverged {
                    iter: inner_iters,
                    detail: format!("inner solve of outer stage {outer_index}"),
                    last: Point::new(anchor, vec![0.0; problem.dim_y()]),
                });
            }
            inner_iters += 1;
            grads = anchored_grad(problem, &point, &anchor, inner_s.p)?;
            oracle_calls += 1;
            let (exact, surrogate) = anchored_gap(problem, &point, &anchor, inner_s.p, &grads)?;
            gap = exact.unwrap_or(surrogate);
        }

        outers.push(CatalystOuterRecord {
            outer_index,
            anchor,
            inner_iters,
            initial_gap: gap0,
            final_gap: gap,
            point: point.clone(),
            oracle_calls,
        });
    }

    Ok(CatalystTrace { final_point: point, total_oracle_calls: oracle_calls, outers })
}
