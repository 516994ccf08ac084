//! Single-loop solvers and baselines as pure step functions, plus the
//! theorem-derived stepsize constructors.
//!
//! Every step function maps `(problem, state, stepsizes)` to a new state,
//! consuming randomness only from the streams carried inside the state;
//! two runs from identical states are bit-identical. Divergence (any
//! coordinate non-finite or beyond [`crate::DIVERGENCE_LIMIT`]) is reported
//! as an error carrying the last finite iterate.
//!
//! Oracle accounting: alternating steps make exactly two stochastic oracle
//! calls per iteration (the y-gradient is queried at the *updated* x);
//! simultaneous steps (GDA, Adam, RMSprop) make one call that returns both
//! blocks under a shared noise realization.

pub(crate) mod catalyst;

pub use catalyst::{
    catalyst_agda_run, catalyst_inner_stepsizes, catalyst_stop_factor, CatalystOuterRecord,
    CatalystTrace, StoppingRule,
};

use crate::linalg;
use crate::problems::{MinimaxProblem, Point};
use crate::rng::{RngStream, StreamId};
use crate::{Error, Result, DIVERGENCE_LIMIT};

/// Stepsize bundle shared by all solvers. `p` (proximal smoothing strength)
/// and `beta` (center averaging) only act in the smoothed step and the
/// proximal-point solver; plain steps carry `p = 0`, `beta = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizes {
    pub tau1: f64,
    pub tau2: f64,
    pub p: f64,
    pub beta: f64,
}

impl StepSizes {
    /// Plain two-stepsize bundle (no smoothing).
    pub fn plain(tau1: f64, tau2: f64) -> Result<Self> {
        Self::smoothed(tau1, tau2, 0.0, 1.0)
    }

    /// Full bundle with smoothing strength and center averaging.
    pub fn smoothed(tau1: f64, tau2: f64, p: f64, beta: f64) -> Result<Self> {
        if !(tau1.is_finite() && tau1 > 0.0 && tau2.is_finite() && tau2 > 0.0) {
            return Err(Error::Config(format!(
                "stepsizes must be positive finite numbers, got τ₁ = {tau1}, τ₂ = {tau2}"
            )));
        }
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::Config(format!(
                "smoothing strength must be nonnegative, got p = {p}"
            )));
        }
        if !(beta.is_finite() && beta > 0.0 && beta <= 1.0) {
            return Err(Error::Config(format!(
                "center averaging must lie in (0, 1], got β = {beta}"
            )));
        }
        Ok(StepSizes { tau1, tau2, p, beta })
    }
}

/// The two independent oracle streams a solver run owns: alternating steps
/// draw the x-sample from `oracle_x` and the y-sample from `oracle_y`;
/// simultaneous single-call steps draw their shared sample from `oracle_x`.
#[derive(Debug, Clone)]
pub struct SolverRng {
    pub oracle_x: RngStream,
    pub oracle_y: RngStream,
}

impl SolverRng {
    pub fn new(seed: u64) -> Self {
        SolverRng {
            oracle_x: RngStream::new(seed, StreamId::OracleX),
            oracle_y: RngStream::new(seed, StreamId::OracleY),
        }
    }
}

/// First/second exponential-moment buffers for the adaptive baselines.
#[derive(Debug, Clone, Default)]
pub struct Moments {
    pub m_x: Vec<f64>,
    pub m_y: Vec<f64>,
    pub v_x: Vec<f64>,
    pub v_y: Vec<f64>,
}

impl Moments {
    fn zeros(dim_x: usize, dim_y: usize) -> Self {
        Moments {
            m_x: vec![0.0; dim_x],
            m_y: vec![0.0; dim_y],
            v_x: vec![0.0; dim_x],
            v_y: vec![0.0; dim_y],
        }
    }
}

/// Mutable state of a solver run. Step functions consume and return it;
/// `iter` increments by exactly one per step and `oracle_calls` accumulates
/// the documented per-step oracle count.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub point: Point,
    /// Proximal center (smoothed step only); length `dim_x` when present.
    pub z: Option<Vec<f64>>,
    /// Moment buffers (adaptive baselines only).
    pub moments: Option<Moments>,
    pub iter: u64,
    pub oracle_calls: u64,
    pub rng: SolverRng,
}

impl SolverState {
    pub fn new(problem: &MinimaxProblem, point: Point, seed: u64) -> Result<Self> {
        if point.x.len() != problem.dim_x() || point.y.len() != problem.dim_y() {
            return Err(Error::Config(format!(
                "initial point dimensions ({}, {}) do not match problem ({}, {})",
                point.x.len(),
                point.y.len(),
                problem.dim_x(),
                problem.dim_y()
            )));
        }
        if !point.is_finite() {
            return Err(Error::Config("initial point has non-finite entries".into()));
        }
        Ok(SolverState {
            point,
            z: None,
            moments: None,
            iter: 0,
            oracle_calls: 0,
            rng: SolverRng::new(seed),
        })
    }

    /// Initializes the proximal center at the current x (required before
    /// smoothed steps).
    pub fn with_proximal_center(mut self) -> Self {
        self.z = Some(self.point.x.clone());
        self
    }

    fn check_divergence(&self, candidate: &Point, detail: &str) -> Result<()> {
        if linalg::within_limit(&candidate.x, DIVERGENCE_LIMIT)
            && linalg::within_limit(&candidate.y, DIVERGENCE_LIMIT)
        {
            Ok(())
        } else {
            Err(Error::Diverged {
                iter: self.iter,
                detail: detail.to_string(),
                last: self.point.clone(),
            })
        }
    }
}

/// One alternating stochastic step: `x⁺ = x − τ₁·Gx(x, y, ξ₁)` followed by
/// `y⁺ = y + τ₂·Gy(x⁺, y, ξ₂)` — the y-oracle sees the already-updated x.
/// Exactly two oracle calls.
pub fn stoc_agda_step(
    problem: &MinimaxProblem,
    mut state: SolverState,
    s: &StepSizes,
) -> Result<SolverState> {
    let gx = problem.sample_grad_x(&state.point, &mut state.rng.oracle_x)?;
    let mut next = state.point.clone();
    linalg::axpy(-s.tau1, &gx, &mut next.x);
    state.check_divergence(&next, "x-update of alternating step")?;
    let gy = problem.sample_grad_y(&next, &mut state.rng.oracle_y)?;
    linalg::axpy(s.tau2, &gy, &mut next.y);
    state.check_divergence(&next, "y-update of alternating step")?;
    state.point = next;
    state.iter += 1;
    state.oracle_calls += 2;
    Ok(state)
}

/// One simultaneous stochastic step: both blocks move using gradients at
/// the old point under one shared sample. One oracle call.
pub fn gda_step(
    problem: &MinimaxProblem,
    mut state: SolverState,
    s: &StepSizes,
) -> Result<SolverState> {
    let (gx, gy) = problem.sample_grad(&state.point, &mut state.rng.oracle_x)?;
    let mut next = state.point.clone();
    linalg::axpy(-s.tau1, &gx, &mut next.x);
    linalg::axpy(s.tau2, &gy, &mut next.y);
    state.check_divergence(&next, "simultaneous gradient step")?;
    state.point = next;
    state.iter += 1;
    state.oracle_calls += 1;
    Ok(state)
}

/// One smoothed alternating step:
/// `x⁺ = x − τ₁[Gx(x, y, ξ₁) + p(x − z)]`, `y⁺ = y + τ₂·Gy(x⁺, y, ξ₂)`,
/// `z⁺ = z + β(x⁺ − z)`. With `β = 1` or `p = 0` the trajectory is
/// bit-identical to [`stoc_agda_step`] under the same rng.
pub fn smoothed_agda_step(
    problem: &MinimaxProblem,
    mut state: SolverState,
    s: &StepSizes,
) -> Result<SolverState> {
    let z = state.z.as_ref().ok_or_else(|| {
        Error::Config("smoothed step requires a proximal center (call with_proximal_center)".into())
    })?;
    if z.len() != problem.dim_x() {
        return Err(Error::Config(format!(
            "proximal center length {} does not match dim_x = {}",
            z.len(),
            problem.dim_x()
        )));
    }
    let mut gx = problem.sample_grad_x(&state.point, &mut state.rng.oracle_x)?;
    for i in 0..gx.len() {
        gx[i] += s.p * (state.point.x[i] - z[i]);
    }
    let mut next = state.point.clone();
    linalg::axpy(-s.tau1, &gx, &mut next.x);
    state.check_divergence(&next, "x-update of smoothed step")?;
    let gy = problem.sample_grad_y(&next, &mut state.rng.oracle_y)?;
    linalg::axpy(s.tau2, &gy, &mut next.y);
    state.check_divergence(&next, "y-update of smoothed step")?;
    let z = state.z.as_mut().expect("checked above");
    for i in 0..z.len() {
        z[i] += s.beta * (next.x[i] - z[i]);
    }
    state.point = next;
    state.iter += 1;
    state.oracle_calls += 2;
    Ok(state)
}

/// Plain (stochastic) gradient ascent on `y ↦ f(x_fixed, y)`: runs `iters`
/// steps `y ← y + τ·Gy(x_fixed, y)` and returns the final y. One oracle
/// call per step. In deterministic mode on a PL block, the optimality gap
/// contracts by `(1 − 1/κ)` per step at `τ = 1/l`.
pub fn gradient_ascent(
    problem: &MinimaxProblem,
    x_fixed: &[f64],
    y0: Vec<f64>,
    tau: f64,
    iters: u64,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let l = problem.smoothness_l();
    if !(tau > 0.0 && tau <= 1.0 / l) {
        return Err(Error::Config(format!(
            "ascent stepsize must satisfy 0 < τ ≤ 1/l = {}, got {tau}",
            1.0 / l
        )));
    }
    let mut p = Point::new(x_fixed.to_vec(), y0);
    for k in 0..iters {
        let gy = problem.sample_grad_y(&p, rng)?;
        linalg::axpy(tau, &gy, &mut p.y);
        if !linalg::within_limit(&p.y, DIVERGENCE_LIMIT) {
            let mut last = p;
            linalg::axpy(-tau, &gy, &mut last.y);
            return Err(Error::Diverged {
                iter: k,
                detail: "gradient ascent on the y-block".into(),
                last,
            });
        }
    }
    Ok(p.y)
}

/// One Adam step: descent on x, ascent on y, both blocks from one shared
/// oracle call at the old point, with bias-corrected exponential moments.
pub fn adam_step(
    problem: &MinimaxProblem,
    state: SolverState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<SolverState> {
    adaptive_step(problem, state, lr, Some(beta1), beta2, eps)
}

/// One RMSprop step: like Adam without the first moment; the second moment
/// is bias-corrected so the initial step has magnitude ≈ lr per coordinate.
pub fn rmsprop_step(
    problem: &MinimaxProblem,
    state: SolverState,
    lr: f64,
    decay: f64,
    eps: f64,
) -> Result<SolverState> {
    adaptive_step(problem, state, lr, None, decay, eps)
}

fn adaptive_step(
    problem: &MinimaxProblem,
    mut state: SolverState,
    lr: f64,
    beta1: Option<f64>,
    beta2: f64,
    eps: f64,
) -> Result<SolverState> {
    if !(lr.is_finite() && lr > 0.0) {
        return Err(Error::Config(format!("learning rate must be positive, got {lr}")));
    }
    for (label, v) in [("momentum", beta1.unwrap_or(0.5)), ("decay", beta2)] {
        if !(0.0 <= v && v < 1.0) {
            return Err(Error::Config(format!("{label} parameter must lie in [0, 1), got {v}")));
        }
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Config(format!("damping must be positive, got {eps}")));
    }
    let (gx, gy) = problem.sample_grad(&state.point, &mut state.rng.oracle_x)?;
    if state.moments.is_none() {
        state.moments = Some(Moments::zeros(problem.dim_x(), problem.dim_y()));
    }
    let t = (state.iter + 1) as i32;
    let moments = state.moments.as_mut().expect("initialized above");
    let mut next = state.point.clone();
    let v_correction = 1.0 - beta2.powi(t);
    let update = |coord: &mut f64,
                  g: f64,
                  m: &mut f64,
                  v: &mut f64,
                  direction: f64| {
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let v_hat = *v / v_correction;
        let g_eff = match beta1 {
            Some(b1) => {
                *m = b1 * *m + (1.0 - b1) * g;
                *m / (1.0 - b1.powi(t))
            }
            None => g,
        };
        *coord += direction * lr * g_eff / (v_hat.sqrt() + eps);
    };
    for i in 0..next.x.len() {
        update(&mut next.x[i], gx[i], &mut moments.m_x[i], &mut moments.v_x[i], -1.0);
    }
    for i in 0..next.y.len() {
        update(&mut next.y[i], gy[i], &mut moments.m_y[i], &mut moments.v_y[i], 1.0);
    }
    state.check_divergence(&next, "adaptive step")?;
    state.point = next;
    state.iter += 1;
    state.oracle_calls += 1;
    Ok(state)
}

/// Stepsizes of the alternating-descent-ascent convergence theorem:
/// `τ₁ = min{√Δ/(4σκ²√(Tl)), 1/(68lκ²)}`,
/// `τ₂ = min{17√Δ/(σ√(Tl)), 1/l}`;
/// `σ = 0` selects the deterministic branch of each min by definition.
/// `Δ` is the initial primal suboptimality `Φ(x₀) − Φ*`.
pub fn theorem1_stepsizes(l: f64, mu: f64, sigma: f64, t: u64, delta: f64) -> Result<StepSizes> {
    check_rate_inputs(l, mu, sigma, t, delta)?;
    let kappa = l / mu;
    let det1 = 1.0 / (68.0 * l * kappa * kappa);
    let det2 = 1.0 / l;
    let (tau1, tau2) = if sigma == 0.0 {
        (det1, det2)
    } else {
        let root = (delta / (t as f64 * l)).sqrt();
        (
            (root / (4.0 * sigma * kappa * kappa)).min(det1),
            (17.0 * root / sigma).min(det2),
        )
    };
    StepSizes::plain(tau1, tau2)
}

/// Stepsizes of the smoothed-alternating convergence theorem:
/// `τ₁ = min{√Δ/(2σ√(Tl)), 1/(3l)}`, `τ₂ = min{√Δ/(96σ√(Tl)), 1/(144l)}`,
/// `p = 2l`, `β = τ₂μ/1600`. The deterministic stepsize ratio is
/// `τ₁/τ₂ = 48` independent of the condition number.
pub fn theorem2_stepsizes(l: f64, mu: f64, sigma: f64, t: u64, delta: f64) -> Result<StepSizes> {
    check_rate_inputs(l, mu, sigma, t, delta)?;
    let det1 = 1.0 / (3.0 * l);
    let det2 = 1.0 / (144.0 * l);
    let (tau1, tau2) = if sigma == 0.0 {
        (det1, det2)
    } else {
        let root = (delta / (t as f64 * l)).sqrt();
        ((root / (2.0 * sigma)).min(det1), (root / (96.0 * sigma)).min(det2))
    };
    StepSizes::smoothed(tau1, tau2, 2.0 * l, tau2 * mu / 1600.0)
}

fn check_rate_inputs(l: f64, mu: f64, sigma: f64, t: u64, delta: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0 && mu.is_finite() && mu > 0.0) {
        return Err(Error::Config(format!(
            "smoothness and PL constants must be positive, got l = {l}, μ = {mu}"
        )));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Config(format!("noise scale must be nonnegative, got σ = {sigma}")));
    }
    if t == 0 {
        return Err(Error::Config("iteration budget T must be positive".into()));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Config(format!(
            "initial suboptimality Δ must be positive, got {delta}"
        )));
    }
    Ok(())
}

/// Stepsizes of the two-sided-PL linear-rate theorem for an objective that
/// is `μ₁`-PL in x and smooth with constant `l_hat`:
/// `τ₁ = 1/l̂`, `τ₂ = μ₁²/(18l̂³)`.
pub fn two_sided_pl_stepsizes(mu1: f64, l_hat: f64) -> Result<StepSizes> {
    if !(mu1 > 0.0 && l_hat > 0.0 && mu1.is_finite() && l_hat.is_finite()) {
        return Err(Error::Config(format!(
            "two-sided-PL constants must be positive, got μ₁ = {mu1}, l = {l_hat}"
        )));
    }
    StepSizes::plain(1.0 / l_hat, mu1 * mu1 / (18.0 * l_hat * l_hat * l_hat))
}

/// Per-step contraction factor `1 − μ₁²μ₂/(36l̂³)` of the two-sided-PL
/// potential under [`two_sided_pl_stepsizes`].
pub fn two_sided_pl_rate(mu1: f64, mu2: f64, l_hat: f64) -> f64 {
    1.0 - mu1 * mu1 * mu2 / (36.0 * l_hat * l_hat * l_hat)
}

/// The dual-side potential `P = [Ψ* − Ψ(y)] + (1/10)[f(x, y) − Ψ(y)]`
/// driving the two-sided-PL linear rate; nonnegative whenever the dual
/// function is exact.
#[derive(Debug, Clone, Copy)]
pub struct TwoSidedPLPotential;

impl TwoSidedPLPotential {
    pub fn evaluate(problem: &MinimaxProblem, point: &Point) -> Result<f64> {
        let psi = problem.psi(&point.y)?;
        let psi_star = problem.psi_star()?;
        let f = problem.value(point)?;
        Ok((psi_star - psi) + 0.1 * (f - psi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadraticSaddle;

    fn problem(sigma: f64) -> MinimaxProblem {
        MinimaxProblem::quadratic_saddle(QuadraticSaddle::new(1.0, 1.0, 2.0).unwrap(), sigma)
            .unwrap()
    }

    fn start(problem: &MinimaxProblem, x: f64, y: f64) -> SolverState {
        SolverState::new(problem, Point::new(vec![x], vec![y]), 42).unwrap()
    }

    #[test]
    fn alternating_step_uses_updated_x() {
        let p = problem(0.0);
        let s = StepSizes::plain(0.1, 0.1).unwrap();
        let out = stoc_agda_step(&p, start(&p, 1.0, 1.0), &s).unwrap();
        // x⁺ = 1 − 0.1·2 = 0.8; ∇_y f(0.8, 1) = −1.2 ⇒ y⁺ = 0.88.
        assert!((out.point.x[0] - 0.8).abs() < 1e-15);
        assert!((out.point.y[0] - 0.88).abs() < 1e-15);
        assert_eq!(out.iter, 1);
        assert_eq!(out.oracle_calls, 2);
    }

    #[test]
    fn simultaneous_step_uses_old_x() {
        let p = problem(0.0);
        let s = StepSizes::plain(0.1, 0.1).unwrap();
        let out = gda_step(&p, start(&p, 1.0, 1.0), &s).unwrap();
        // ∇_y f(1, 1) = −1 ⇒ y⁺ = 0.9: differs from the alternating step.
        assert!((out.point.x[0] - 0.8).abs() < 1e-15);
        assert!((out.point.y[0] - 0.9).abs() < 1e-15);
        assert_eq!(out.oracle_calls, 1);
    }

    #[test]
    fn smoothed_step_matches_hand_derivation() {
        let p = problem(0.0);
        let s = StepSizes::smoothed(0.1, 0.1, 4.0, 0.01).unwrap();
        let state = start(&p, 1.0, 1.0).with_proximal_center();
        let out = smoothed_agda_step(&p, state, &s).unwrap();
        // z = x at start so the smoothing term vanishes; z⁺ = 1 + 0.01(0.8−1).
        assert!((out.point.x[0] - 0.8).abs() < 1e-15);
        assert!((out.point.y[0] - 0.88).abs() < 1e-15);
        assert!((out.z.as_ref().unwrap()[0] - 0.998).abs() < 1e-15);
    }

    #[test]
    fn smoothed_step_requires_center() {
        let p = problem(0.0);
        let s = StepSizes::smoothed(0.1, 0.1, 4.0, 0.5).unwrap();
        assert!(matches!(
            smoothed_agda_step(&p, start(&p, 1.0, 1.0), &s),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn smoothed_reduces_to_plain_at_beta_one_p_zero() {
        let p = problem(1.0); // stochastic to exercise the rng contract
        let s_plain = StepSizes::plain(0.05, 0.1).unwrap();
        let s_reduced = StepSizes::smoothed(0.05, 0.1, 0.0, 1.0).unwrap();
        let mut a = start(&p, 1.0, 1.0);
        let mut b = start(&p, 1.0, 1.0).with_proximal_center();
        for _ in 0..50 {
            a = stoc_agda_step(&p, a, &s_plain).unwrap();
            b = smoothed_agda_step(&p, b, &s_reduced).unwrap();
            assert_eq!(a.point, b.point);
        }
    }

    #[test]
    fn stationary_points_are_fixed() {
        let p = problem(0.0);
        let s = StepSizes::plain(0.3, 0.3).unwrap();
        let zero = Point::zeros(1, 1); // saddle of the homogeneous instance
        let out = stoc_agda_step(&p, SolverState::new(&p, zero.clone(), 1).unwrap(), &s).unwrap();
        assert_eq!(out.point, zero);
        let out = gda_step(&p, SolverState::new(&p, zero.clone(), 1).unwrap(), &s).unwrap();
        assert_eq!(out.point, zero);
        let sm = StepSizes::smoothed(0.3, 0.3, 4.0, 0.5).unwrap();
        let st = SolverState::new(&p, zero.clone(), 1).unwrap().with_proximal_center();
        let out = smoothed_agda_step(&p, st, &sm).unwrap();
        assert_eq!(out.point, zero);
        assert_eq!(out.z.unwrap(), zero.x);
    }

    #[test]
    fn determinism_under_shared_seed() {
        let p = problem(1.0);
        let s = StepSizes::plain(0.05, 0.1).unwrap();
        let run = || {
            let mut st = start(&p, 1.0, 1.0);
            for _ in 0..25 {
                st = stoc_agda_step(&p, st, &s).unwrap();
            }
            st.point
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn divergence_carries_last_finite_point() {
        // Unstable stepsize on a saddle with a = −1 drives x to infinity.
        let q = QuadraticSaddle::new(-1.0, 1.0, 2.0).unwrap();
        let p = MinimaxProblem::quadratic_saddle(q, 0.0).unwrap();
        let s = StepSizes::plain(3.0, 0.1).unwrap();
        let mut st = start(&p, 1.0, 0.0);
        let err = loop {
            match stoc_agda_step(&p, st, &s) {
                Ok(next) => st = next,
                Err(e) => break e,
            }
        };
        match err {
            Error::Diverged { last, .. } => assert!(last.is_finite()),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn ascent_hand_step_and_linear_convergence() {
        let p = problem(0.0);
        let mut rng = RngStream::new(9, StreamId::OracleY);
        // One step at τ = 0.5 from y = 0: ∇_y f(1, 0) = 1 ⇒ y = 0.5.
        let y = gradient_ascent(&p, &[1.0], vec![0.0], 0.5, 1, &mut rng).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-15);
        // y*(1) = 0.5; 200 deterministic steps converge far below 1e−12.
        let y = gradient_ascent(&p, &[1.0], vec![1.0], 0.5, 200, &mut rng).unwrap();
        assert!((y[0] - 0.5).abs() <= 1e-12);
        // Fixed point: starting at y* stays put.
        let y = gradient_ascent(&p, &[1.0], vec![0.5], 0.5, 10, &mut rng).unwrap();
        assert_eq!(y[0], 0.5);
        // Stepsize above 1/l is rejected.
        assert!(gradient_ascent(&p, &[1.0], vec![0.0], 0.6, 1, &mut rng).is_err());
    }

    #[test]
    fn adaptive_first_step_is_signed_gradient_scale() {
        let p = problem(0.0);
        let lr = 1e-3;
        let out = adam_step(&p, start(&p, 1.0, 1.0), lr, 0.9, 0.999, 1e-8).unwrap();
        // Bias correction makes the first update lr·sign(g) up to damping.
        assert!((out.point.x[0] - (1.0 - lr)).abs() < 1e-6);
        assert!((out.point.y[0] - (1.0 - lr)).abs() < 1e-6);
        assert_eq!(out.oracle_calls, 1);
        let out = rmsprop_step(&p, start(&p, 1.0, 1.0), lr, 0.99, 1e-8).unwrap();
        assert!((out.point.x[0] - (1.0 - lr)).abs() < 1e-6);
        assert!((out.point.y[0] - (1.0 - lr)).abs() < 1e-6);
    }

    #[test]
    fn adaptive_zero_gradient_zero_moments_is_fixed() {
        let p = problem(0.0);
        let zero = Point::zeros(1, 1);
        let out =
            adam_step(&p, SolverState::new(&p, zero.clone(), 1).unwrap(), 1e-3, 0.9, 0.999, 1e-8)
                .unwrap();
        assert_eq!(out.point, zero);
    }

    #[test]
    fn theorem1_values() {
        // l = 2, μ = 2 (κ = 1), σ = 0.
        let s = theorem1_stepsizes(2.0, 2.0, 0.0, 1000, 0.75).unwrap();
        assert!((s.tau1 - 1.0 / 136.0).abs() < 1e-18);
        assert_eq!(s.tau2, 0.5);
        assert_eq!((s.p, s.beta), (0.0, 1.0));
        // Doubling κ at σ = 0 divides τ₁ by 4 and leaves τ₂ unchanged.
        let s2 = theorem1_stepsizes(2.0, 1.0, 0.0, 1000, 0.75).unwrap();
        assert!((s2.tau1 - s.tau1 / 4.0).abs() < 1e-18);
        assert_eq!(s2.tau2, s.tau2);
        // The stepsize caps respect τ·l ≤ 1.
        assert!(s.tau1 * 2.0 <= 1.0 && s.tau2 * 2.0 <= 1.0);
    }

    #[test]
    fn theorem2_values() {
        let s = theorem2_stepsizes(2.0, 2.0, 0.0, 1000, 0.75).unwrap();
        assert!((s.tau1 - 1.0 / 6.0).abs() < 1e-18);
        assert!((s.tau2 - 1.0 / 288.0).abs() < 1e-18);
        assert_eq!(s.p, 4.0);
        assert!((s.beta - 1.0 / 230_400.0).abs() < 1e-18);
        // Deterministic ratio is 48 regardless of the constants.
        for l in [0.5, 2.0, 31.0] {
            let s = theorem2_stepsizes(l, l / 3.0, 0.0, 10, 1.0).unwrap();
            assert!((s.tau1 / s.tau2 - 48.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stepsize_constructors_reject_bad_inputs() {
        assert!(theorem1_stepsizes(0.0, 1.0, 0.0, 10, 1.0).is_err());
        assert!(theorem1_stepsizes(1.0, -1.0, 0.0, 10, 1.0).is_err());
        assert!(theorem1_stepsizes(1.0, 1.0, 0.0, 0, 1.0).is_err());
        assert!(theorem1_stepsizes(1.0, 1.0, 0.0, 10, 0.0).is_err());
        assert!(theorem2_stepsizes(1.0, 1.0, -1.0, 10, 1.0).is_err());
        assert!(StepSizes::plain(0.0, 0.1).is_err());
        assert!(StepSizes::smoothed(0.1, 0.1, -1.0, 0.5).is_err());
        assert!(StepSizes::smoothed(0.1, 0.1, 1.0, 0.0).is_err());
        assert!(StepSizes::smoothed(0.1, 0.1, 1.0, 1.5).is_err());
    }

    #[test]
    fn two_sided_pl_constants_match_proximal_defaults() {
        // Anchoring (1,1,2) with strength 2l = 4 gives μ₁ = 5, l̂ = 5.
        let s = two_sided_pl_stepsizes(5.0, 5.0).unwrap();
        assert!((s.tau1 - 0.2).abs() < 1e-18);
        assert!((s.tau2 - 25.0 / (18.0 * 125.0)).abs() < 1e-18);
        let rate = two_sided_pl_rate(5.0, 2.0, 5.0);
        assert!((rate - (1.0 - 1.0 / 90.0)).abs() < 1e-15);
        // Worst-case mapping l̂ = 3l, μ₁ = l reproduces the proximal-point
        // inner defaults 1/(3l), 1/(486l).
        let l = 2.0;
        let s = two_sided_pl_stepsizes(l, 3.0 * l).unwrap();
        assert!((s.tau1 - 1.0 / (3.0 * l)).abs() < 1e-18);
        assert!((s.tau2 - 1.0 / (486.0 * l)).abs() < 1e-15);
    }

    #[test]
    fn dual_potential_is_nonnegative_and_zero_at_saddle() {
        let p = problem(0.0);
        let v = TwoSidedPLPotential::evaluate(&p, &Point::new(vec![1.0], vec![1.0])).unwrap();
        assert!(v > 0.0);
        let at_saddle = TwoSidedPLPotential::evaluate(&p, &Point::zeros(1, 1)).unwrap();
        assert!(at_saddle.abs() < 1e-15);
    }
}
