//! Minimax problem abstraction and the built-in test objectives.
//!
//! Every problem is a [`MinimaxProblem`]: a smooth objective `f(x, y)` that
//! is minimized over `x` and maximized over `y`, together with its declared
//! constants — per-block smoothness `l`, the Polyak-Łojasiewicz constant `μ`
//! of the maximization block, and a noise scale `σ` for the stochastic
//! gradient oracle. Analytic helpers (the best response `y*(x)`, the primal
//! function `Φ(x) = max_y f(x,y)`, its gradient, the dual function `Ψ`, and
//! the proximal map of `Φ`) are exposed where they are exact; callers that
//! need them elsewhere must fall back to the numerical estimators in
//! [`crate::metrics`].
//!
//! Smoothness and curvature constants are certified on a bounded test box
//! per problem (quartic terms are not globally Lipschitz-smooth); the box is
//! part of the problem's declaration.
//!
//! Built-in objectives:
//! - [`QuadraticSaddle`] / [`AffineQuadratic`]: scalar quadratics with every
//!   closed form, the ground-truth oracle for metric and solver tests;
//! - [`DegenerateQuadratic`]: concave but *not* strongly concave in `y`
//!   (singular curvature), PL with an affine argmax subspace;
//! - linear-generator WGAN with closed-form expectation and mini-batch oracle;
//! - neural-generator WGAN (one hidden ReLU layer) over a fixed latent sample;
//! - robust regression: a two-hidden-layer ReLU network against adversarially
//!   perturbed targets, gradients by hand-coded backpropagation.

mod degenerate;
mod mlp;
mod quadratic;
mod robust;
mod wgan;
mod wgan_neural;

pub use degenerate::DegenerateQuadratic;
pub use quadratic::{AffineQuadratic, QuadraticSaddle};
pub use robust::{RobustRegression, RobustRegressionConfig};
pub use wgan::LinearWgan;
pub use wgan_neural::NeuralWgan;

use crate::rng::{derive_seed, RngStream, StreamId};
use crate::{Error, Result};

/// A primal-dual iterate: `x` is the minimization block, `y` the
/// maximization block. Lengths must match the owning problem's dimensions;
/// operations report a configuration error otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Point { x, y }
    }

    pub fn zeros(dim_x: usize, dim_y: usize) -> Self {
        Point {
            x: vec![0.0; dim_x],
            y: vec![0.0; dim_y],
        }
    }

    /// True when every coordinate of both blocks is finite.
    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.y.iter()).all(|v| v.is_finite())
    }
}

/// Which analytic helper a [`MinimaxProblem`] declares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormKind {
    YStar,
    Phi,
    GradPhi,
    Psi,
    PhiStar,
    ProxPhi,
}

/// A request for one analytic helper evaluation.
#[derive(Debug, Clone, Copy)]
pub enum ClosedFormQuery<'a> {
    /// Best response `y*(x)` (the minimum-norm representative when the
    /// argmax set is not a singleton).
    YStar(&'a [f64]),
    /// Primal value `Φ(x) = max_y f(x, y)`.
    Phi(&'a [f64]),
    /// Gradient of the primal function at `x`.
    GradPhi(&'a [f64]),
    /// Dual value `Ψ(y) = min_x f(x, y)`.
    Psi(&'a [f64]),
    /// Proximal point `argmin_z Φ(z) + ‖z − x‖²/(2λ)`.
    ProxPhi { x: &'a [f64], lambda: f64 },
}

/// Result of a [`ClosedFormQuery`].
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedFormAnswer {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl ClosedFormAnswer {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            ClosedFormAnswer::Scalar(v) => Some(*v),
            ClosedFormAnswer::Vector(_) => None,
        }
    }

    pub fn vector(&self) -> Option<&[f64]> {
        match self {
            ClosedFormAnswer::Scalar(_) => None,
            ClosedFormAnswer::Vector(v) => Some(v),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Kind {
    Quadratic(AffineQuadratic),
    Degenerate(DegenerateQuadratic),
    WganLinear(LinearWgan),
    WganNeural(NeuralWgan),
    Robust(RobustRegression),
}

/// A smooth nonconvex–PL minimax objective with declared constants.
///
/// Instances are immutable after construction and safe to share across
/// threads; all randomness is drawn from caller-provided
/// [`RngStream`](crate::rng::RngStream)s.
#[derive(Debug, Clone)]
pub struct MinimaxProblem {
    name: &'static str,
    dim_x: usize,
    dim_y: usize,
    smoothness_l: f64,
    pl_mu: f64,
    noise_sigma: f64,
    box_x: f64,
    box_y: f64,
    x_curvature_lb: f64,
    kind: Kind,
}

impl MinimaxProblem {
    // ------------------------------------------------------------------
    // Constructors
    // ------------------------------------------------------------------

    /// The scalar benchmark saddle `f(x,y) = (a/2)x² + bxy − (c/2)y²` with
    /// additive-Gaussian noise of scale `noise_sigma` (0 = deterministic).
    pub fn quadratic_saddle(q: QuadraticSaddle, noise_sigma: f64) -> Result<Self> {
        Self::affine_quadratic(AffineQuadratic::homogeneous(q), noise_sigma)
    }

    /// The affine scalar quadratic family (closed under anchoring). Unlike
    /// [`QuadraticSaddle`], `a = b = 0` is allowed here, which makes the
    /// objective constant in `x`.
    pub fn affine_quadratic(q: AffineQuadratic, noise_sigma: f64) -> Result<Self> {
        for (label, v) in [
            ("a", q.a),
            ("b", q.b),
            ("c", q.c),
            ("d", q.d),
            ("e", q.e),
            ("f0", q.f0),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("quadratic coefficient {label} must be finite")));
            }
        }
        if q.c <= 0.0 {
            return Err(Error::Config(format!(
                "quadratic family needs c > 0 for concavity in y, got c = {}",
                q.c
            )));
        }
        check_noise(noise_sigma)?;
        Ok(MinimaxProblem {
            name: "quadratic-saddle",
            dim_x: 1,
            dim_y: 1,
            smoothness_l: q.smoothness(),
            pl_mu: q.c,
            noise_sigma,
            box_x: 10.0,
            box_y: 10.0,
            x_curvature_lb: q.a,
            kind: Kind::Quadratic(q),
        })
    }

    /// A quadratic coupling `f(x,y) = g(x) + xᵀBy − (1/2)yᵀMy` where `M` is
    /// singular positive semidefinite, so `f(x,·)` is concave but not
    /// strongly concave, yet PL with `μ` = smallest positive eigenvalue.
    /// `g` is the double well `(1/4)‖x‖⁴ − (ρ/2)‖x‖²`. The coupling and the
    /// eigenbasis of `M` are synthesized deterministically from
    /// `structure_seed`.
    pub fn degenerate_quadratic(
        dim_x: usize,
        dim_y: usize,
        rank: usize,
        well_depth: f64,
        structure_seed: u64,
        noise_sigma: f64,
    ) -> Result<Self> {
        check_noise(noise_sigma)?;
        let d = DegenerateQuadratic::synthesize(dim_x, dim_y, rank, well_depth, structure_seed)?;
        let box_x = 1.5;
        let box_y = 10.0;
        let l = d.smoothness_on_box(box_x);
        let mu = d.min_positive_eigenvalue();
        Ok(MinimaxProblem {
            name: "degenerate-quadratic",
            dim_x,
            dim_y,
            smoothness_l: l,
            pl_mu: mu,
            noise_sigma,
            box_x,
            box_y,
            x_curvature_lb: -well_depth,
            kind: Kind::Degenerate(d),
        })
    }

    /// WGAN with linear generator `G(z) = μ + σz` and quadratic
    /// discriminator `D(w) = φ₁w + φ₂w²`, fitting `N(μ̂, σ̂²)` data with an
    /// `λ‖φ‖²` penalty. Default data parameters `μ̂ = 0`, `σ̂ = 0.1`,
    /// `λ = 10⁻³`. In deterministic mode the closed-form expectation is
    /// used; otherwise the oracle averages a fresh mini-batch per call.
    pub fn linear_wgan(batch_size: usize, deterministic: bool) -> Result<Self> {
        Self::linear_wgan_with(0.0, 0.1, 1e-3, batch_size, deterministic)
    }

    pub fn linear_wgan_with(
        mu_hat: f64,
        sigma_hat: f64,
        lambda: f64,
        batch_size: usize,
        deterministic: bool,
    ) -> Result<Self> {
        let w = LinearWgan::new(mu_hat, sigma_hat, lambda, batch_size, deterministic)?;
        let box_y = 10.0;
        let noise_sigma = w.declared_noise();
        Ok(MinimaxProblem {
            name: "wgan-linear",
            dim_x: 2,
            dim_y: 2,
            smoothness_l: w.smoothness_on_box(10.0, box_y),
            pl_mu: 2.0 * lambda,
            noise_sigma,
            box_x: 10.0,
            box_y,
            // x-Hessian is diag(−2φ₂, −2φ₂), bounded below by −2·box_y.
            x_curvature_lb: -2.0 * box_y,
            kind: Kind::WganLinear(w),
        })
    }

    /// WGAN whose generator is a one-hidden-layer ReLU network `G_θ(z)`.
    /// The objective is defined against a fixed latent sample (drawn once
    /// from `structure_seed`), so generator moments — and hence `Φ` and
    /// `y*` — remain exact; the stochastic oracle mini-batches latent
    /// indices and fresh data draws.
    pub fn neural_wgan(
        hidden: usize,
        latent_count: usize,
        batch_size: usize,
        deterministic: bool,
        structure_seed: u64,
    ) -> Result<Self> {
        let w = NeuralWgan::new(hidden, latent_count, batch_size, deterministic, structure_seed)?;
        let dim_x = w.dim_theta();
        let box_x = 2.0;
        let box_y = 10.0;
        let noise_sigma = w.declared_noise();
        let l = w.declared_smoothness(box_x, box_y);
        Ok(MinimaxProblem {
            name: "wgan-neural",
            dim_x,
            dim_y: 2,
            smoothness_l: l,
            pl_mu: 2.0 * w.lambda(),
            noise_sigma,
            box_x,
            box_y,
            x_curvature_lb: -l,
            kind: Kind::WganNeural(w),
        })
    }

    /// Robust regression: a two-hidden-layer ReLU network `net_x` fit to
    /// synthetic data under adversarial target perturbation,
    /// `f(x,y) = (1/n)Σ ½(net_x(zᵢ) − yᵢ)² − (λ/2)‖y − y₀‖²`.
    /// The y-block has strong-concavity modulus `λ − 1/n` (the data term
    /// contributes `+1/(2n)` curvature per target), which is the declared
    /// PL constant.
    pub fn robust_regression(cfg: RobustRegressionConfig) -> Result<Self> {
        let r = RobustRegression::synthesize(cfg)?;
        Self::robust_from_kind(r)
    }

    /// Robust regression over caller-provided data (rows of features plus a
    /// final target column).
    pub fn robust_regression_with_data(
        features: Vec<f64>,
        targets: Vec<f64>,
        cfg: RobustRegressionConfig,
    ) -> Result<Self> {
        let r = RobustRegression::from_data(features, targets, cfg)?;
        Self::robust_from_kind(r)
    }

    fn robust_from_kind(r: RobustRegression) -> Result<Self> {
        let box_x = 0.5;
        let box_y = 10.0;
        let l = r.declared_smoothness();
        let mu = r.pl_mu();
        Ok(MinimaxProblem {
            name: "robust-regression",
            dim_x: r.dim_theta(),
            dim_y: r.n(),
            smoothness_l: l,
            pl_mu: mu,
            noise_sigma: r.declared_noise(),
            box_x,
            box_y,
            x_curvature_lb: -l,
            kind: Kind::Robust(r),
        })
    }

    // ------------------------------------------------------------------
    // Declared constants
    // ------------------------------------------------------------------

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn dim_y(&self) -> usize {
        self.dim_y
    }

    /// Per-block gradient Lipschitz constant `l`, valid on the test box.
    pub fn smoothness_l(&self) -> f64 {
        self.smoothness_l
    }

    /// PL constant `μ` of the maximization block.
    pub fn pl_mu(&self) -> f64 {
        self.pl_mu
    }

    /// Scale bound `σ` of the stochastic gradient oracle (0 when the oracle
    /// is exact).
    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    /// Condition number `κ = l/μ`.
    pub fn kappa(&self) -> f64 {
        self.smoothness_l / self.pl_mu
    }

    /// Half-widths `(bx, by)` of the `‖·‖∞` box on which the declared
    /// constants are certified.
    pub fn test_box(&self) -> (f64, f64) {
        (self.box_x, self.box_y)
    }

    /// Lower bound on the x-block Hessian over the test box (negative for
    /// nonconvex problems); used to size proximal regularization.
    pub fn x_curvature_lb(&self) -> f64 {
        self.x_curvature_lb
    }

    /// The underlying affine-quadratic coefficients when this problem is a
    /// member of that family.
    pub fn affine_form(&self) -> Option<&AffineQuadratic> {
        match &self.kind {
            Kind::Quadratic(q) => Some(q),
            _ => None,
        }
    }

    /// A reasonable default starting point: unit displacement in `x` (or a
    /// seeded weight initialization for the network problems) with the dual
    /// block at its natural origin. The linear GAN starts as the standard
    /// normal generator `(μ, σ) = (0, 1)`, which keeps the reference
    /// stepsizes inside their stable region; a unit-mean start drives the
    /// critic's quadratic weight — and with it the generator curvature —
    /// beyond what those stepsizes tolerate.
    pub fn default_init(&self, seed: u64) -> Point {
        match &self.kind {
            Kind::Quadratic(_) => Point::new(vec![1.0], vec![0.0]),
            Kind::Degenerate(_) => Point::new(vec![1.0; self.dim_x], vec![0.0; self.dim_y]),
            Kind::WganLinear(_) => Point::new(vec![0.0, 1.0], vec![0.0, 0.0]),
            Kind::WganNeural(w) => {
                let mut rng = RngStream::new(seed, StreamId::Init);
                Point::new(w.init_theta(&mut rng), vec![0.0, 0.0])
            }
            Kind::Robust(r) => {
                let mut rng = RngStream::new(seed, StreamId::Init);
                Point::new(r.init_theta(&mut rng), r.clean_targets().to_vec())
            }
        }
    }

    // ------------------------------------------------------------------
    // Oracles
    // ------------------------------------------------------------------

    /// Objective value `f(x, y)`.
    pub fn value(&self, p: &Point) -> Result<f64> {
        self.check_point(p)?;
        let v = match &self.kind {
            Kind::Quadratic(q) => q.value(p.x[0], p.y[0]),
            Kind::Degenerate(d) => d.value(&p.x, &p.y),
            Kind::WganLinear(w) => w.value(&p.x, &p.y),
            Kind::WganNeural(w) => w.value(&p.x, &p.y),
            Kind::Robust(r) => r.value(&p.x, &p.y),
        };
        self.ensure_finite_scalar("value", v)
    }

    /// Exact analytic gradient pair `(∇ₓf, ∇_y f)`. Deterministic.
    pub fn grad(&self, p: &Point) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_point(p)?;
        let (gx, gy) = match &self.kind {
            Kind::Quadratic(q) => {
                let (gx, gy) = q.grad(p.x[0], p.y[0]);
                (vec![gx], vec![gy])
            }
            Kind::Degenerate(d) => d.grad(&p.x, &p.y),
            Kind::WganLinear(w) => w.grad(&p.x, &p.y),
            Kind::WganNeural(w) => w.grad(&p.x, &p.y),
            Kind::Robust(r) => r.grad(&p.x, &p.y),
        };
        self.ensure_finite_pair("grad", gx, gy)
    }

    /// Stochastic gradient pair sharing one noise realization (one oracle
    /// call). Unbiased for [`Self::grad`]; per-coordinate variance is at
    /// most `σ²/dim` for the additive-noise problems. Consumes a fixed,
    /// documented number of words from `rng` (zero when `σ = 0` or in
    /// deterministic mode), so trajectories are bit-reproducible.
    pub fn sample_grad(&self, p: &Point, rng: &mut RngStream) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_point(p)?;
        let (gx, gy) = match &self.kind {
            Kind::Quadratic(q) => {
                let (gx, gy) = q.grad(p.x[0], p.y[0]);
                let mut gx = vec![gx];
                let mut gy = vec![gy];
                add_gaussian_noise(&mut gx, self.noise_sigma, rng);
                add_gaussian_noise(&mut gy, self.noise_sigma, rng);
                (gx, gy)
            }
            Kind::Degenerate(d) => {
                let (mut gx, mut gy) = d.grad(&p.x, &p.y);
                add_gaussian_noise(&mut gx, self.noise_sigma, rng);
                add_gaussian_noise(&mut gy, self.noise_sigma, rng);
                (gx, gy)
            }
            Kind::WganLinear(w) => w.sample_grad(&p.x, &p.y, rng),
            Kind::WganNeural(w) => w.sample_grad(&p.x, &p.y, rng),
            Kind::Robust(r) => r.sample_grad(&p.x, &p.y, rng),
        };
        self.ensure_finite_pair("sample_grad", gx, gy)
    }

    /// Stochastic x-block gradient only (one oracle call on the x stream).
    pub fn sample_grad_x(&self, p: &Point, rng: &mut RngStream) -> Result<Vec<f64>> {
        self.check_point(p)?;
        let gx = match &self.kind {
            Kind::Quadratic(q) => {
                let mut gx = vec![q.grad(p.x[0], p.y[0]).0];
                add_gaussian_noise(&mut gx, self.noise_sigma, rng);
                gx
            }
            Kind::Degenerate(d) => {
                let mut gx = d.grad(&p.x, &p.y).0;
                add_gaussian_noise(&mut gx, self.noise_sigma, rng);
                gx
            }
            Kind::WganLinear(w) => w.sample_grad(&p.x, &p.y, rng).0,
            Kind::WganNeural(w) => w.sample_grad(&p.x, &p.y, rng).0,
            Kind::Robust(r) => r.sample_grad_x(&p.x, &p.y, rng),
        };
        self.ensure_finite_block("sample_grad_x", gx)
    }

    /// Stochastic y-block gradient only (one oracle call on the y stream).
    pub fn sample_grad_y(&self, p: &Point, rng: &mut RngStream) -> Result<Vec<f64>> {
        self.check_point(p)?;
        let gy = match &self.kind {
            Kind::Quadratic(q) => {
                let mut gy = vec![q.grad(p.x[0], p.y[0]).1];
                add_gaussian_noise(&mut gy, self.noise_sigma, rng);
                gy
            }
            Kind::Degenerate(d) => {
                let mut gy = d.grad(&p.x, &p.y).1;
                add_gaussian_noise(&mut gy, self.noise_sigma, rng);
                gy
            }
            Kind::WganLinear(w) => w.sample_grad(&p.x, &p.y, rng).1,
            Kind::WganNeural(w) => w.sample_grad(&p.x, &p.y, rng).1,
            Kind::Robust(r) => r.sample_grad_y(&p.x, &p.y, rng),
        };
        self.ensure_finite_block("sample_grad_y", gy)
    }

    /// Central-difference gradient with per-coordinate step
    /// `hᵢ = h·max(1, |vᵢ|)`. An independent oracle for tests; not used by
    /// any solver.
    pub fn finite_diff_grad(&self, p: &Point, h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_point(p)?;
        if h <= 0.0 {
            return Err(Error::Config(format!("finite-difference step must be positive, got {h}")));
        }
        let mut probe = p.clone();
        let mut gx = vec![0.0; self.dim_x];
        let mut gy = vec![0.0; self.dim_y];
        for i in 0..self.dim_x {
            let base = p.x[i];
            let hi = h * base.abs().max(1.0);
            probe.x[i] = base + hi;
            let up = self.value(&probe)?;
            probe.x[i] = base - hi;
            let down = self.value(&probe)?;
            probe.x[i] = base;
            gx[i] = (up - down) / (2.0 * hi);
        }
        for i in 0..self.dim_y {
            let base = p.y[i];
            let hi = h * base.abs().max(1.0);
            probe.y[i] = base + hi;
            let up = self.value(&probe)?;
            probe.y[i] = base - hi;
            let down = self.value(&probe)?;
            probe.y[i] = base;
            gy[i] = (up - down) / (2.0 * hi);
        }
        self.ensure_finite_pair("finite_diff_grad", gx, gy)
    }

    /// Distance from `x` to the nearest activation kink of the problem's
    /// network; `None` when the objective is smooth in x everywhere.
    /// Difference quotients are only trustworthy at points whose kink
    /// distance comfortably exceeds the probe step.
    pub fn min_kink_distance(&self, x: &[f64]) -> Result<Option<f64>> {
        self.check_x(x)?;
        Ok(match &self.kind {
            Kind::WganNeural(w) => Some(w.min_kink_distance(x)),
            Kind::Robust(r) => Some(r.min_kink_distance(x)),
            _ => None,
        })
    }

    // ------------------------------------------------------------------
    // Closed forms
    // ------------------------------------------------------------------

    /// Whether the given analytic helper is exact for this problem.
    pub fn has_closed_form(&self, which: ClosedFormKind) -> bool {
        use ClosedFormKind::*;
        match &self.kind {
            Kind::Quadratic(q) => match which {
                YStar | Phi | GradPhi | ProxPhi => true,
                Psi => q.a > 0.0,
                PhiStar => q.phi_q() > 0.0,
            },
            Kind::Degenerate(_) | Kind::WganLinear(_) | Kind::WganNeural(_) | Kind::Robust(_) => {
                matches!(which, YStar | Phi | GradPhi)
            }
        }
    }

    /// Best response `y*(x)`; the minimum-norm representative when the
    /// argmax set is degenerate.
    pub fn y_star(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_x(x)?;
        match &self.kind {
            Kind::Quadratic(q) => Ok(vec![q.y_star(x[0])]),
            Kind::Degenerate(d) => Ok(d.y_star(x)),
            Kind::WganLinear(w) => Ok(w.y_star(x)),
            Kind::WganNeural(w) => Ok(w.y_star(x)),
            Kind::Robust(r) => Ok(r.y_star(x)),
        }
    }

    /// Primal value `Φ(x) = max_y f(x, y)`.
    pub fn phi(&self, x: &[f64]) -> Result<f64> {
        self.check_x(x)?;
        let v = match &self.kind {
            Kind::Quadratic(q) => q.phi(x[0]),
            Kind::Degenerate(d) => d.phi(x),
            Kind::WganLinear(w) => w.phi(x),
            Kind::WganNeural(w) => w.phi(x),
            Kind::Robust(r) => r.phi(x),
        };
        self.ensure_finite_scalar("phi", v)
    }

    /// Gradient of the primal function (defined almost everywhere for the
    /// ReLU-network problems; the subgradient convention at kinks is 0).
    pub fn grad_phi_exact(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_x(x)?;
        let g = match &self.kind {
            Kind::Quadratic(q) => vec![q.grad_phi(x[0])],
            Kind::Degenerate(d) => d.grad_phi(x),
            Kind::WganLinear(w) => w.grad_phi(x),
            Kind::WganNeural(w) => w.grad_phi(x),
            Kind::Robust(r) => r.grad_phi(x),
        };
        self.ensure_finite_block("grad_phi", g)
    }

    /// Dual value `Ψ(y) = min_x f(x, y)`; exact only for strongly-convex-in-x
    /// members of the quadratic family.
    pub fn psi(&self, y: &[f64]) -> Result<f64> {
        self.check_y(y)?;
        match &self.kind {
            Kind::Quadratic(q) if q.a > 0.0 => q.psi(y[0]),
            _ => Err(self.unavailable("Psi")),
        }
    }

    /// Minimum of the primal function.
    pub fn phi_star(&self) -> Result<f64> {
        match &self.kind {
            Kind::Quadratic(q) if q.phi_q() > 0.0 => q.phi_star(),
            _ => Err(self.unavailable("Phi_star")),
        }
    }

    /// Maximum of the dual function (quadratic family only).
    pub fn psi_star(&self) -> Result<f64> {
        match &self.kind {
            Kind::Quadratic(q) if q.a > 0.0 => q.psi_star(),
            _ => Err(self.unavailable("Psi_star")),
        }
    }

    /// Proximal point of the primal function,
    /// `argmin_z Φ(z) + ‖z − x‖²/(2λ)`.
    pub fn prox_phi(&self, x: &[f64], lambda: f64) -> Result<Vec<f64>> {
        self.check_x(x)?;
        match &self.kind {
            Kind::Quadratic(q) => Ok(vec![q.prox_phi(x[0], lambda)?]),
            _ => Err(self.unavailable("prox_Phi")),
        }
    }

    /// Dispatching wrapper over the analytic helpers, for callers that
    /// select the helper at runtime (CLI, bindings).
    pub fn closed_form_query(&self, q: ClosedFormQuery<'_>) -> Result<ClosedFormAnswer> {
        match q {
            ClosedFormQuery::YStar(x) => self.y_star(x).map(ClosedFormAnswer::Vector),
            ClosedFormQuery::Phi(x) => self.phi(x).map(ClosedFormAnswer::Scalar),
            ClosedFormQuery::GradPhi(x) => self.grad_phi_exact(x).map(ClosedFormAnswer::Vector),
            ClosedFormQuery::Psi(y) => self.psi(y).map(ClosedFormAnswer::Scalar),
            ClosedFormQuery::ProxPhi { x, lambda } => {
                self.prox_phi(x, lambda).map(ClosedFormAnswer::Vector)
            }
        }
    }

    // ------------------------------------------------------------------
    // Distances and derived problems
    // ------------------------------------------------------------------

    /// Distance from `y` to the argmax set of `f(x, ·)`.
    pub fn dist_to_argmax(&self, p: &Point) -> Result<f64> {
        self.check_point(p)?;
        let d = match &self.kind {
            Kind::Quadratic(q) => (p.y[0] - q.y_star(p.x[0])).abs(),
            Kind::Degenerate(d) => d.dist_to_argmax(&p.x, &p.y),
            Kind::WganLinear(w) => crate::linalg::dist(&p.y, &w.y_star(&p.x)),
            Kind::WganNeural(w) => crate::linalg::dist(&p.y, &w.y_star(&p.x)),
            Kind::Robust(r) => crate::linalg::dist(&p.y, &r.y_star(&p.x)),
        };
        self.ensure_finite_scalar("dist_to_argmax", d)
    }

    /// Distance to the known optimum. For the quadratic family this is the
    /// full primal-dual distance to the saddle; for the WGAN problems it is
    /// the generator-block distance to the nearer of the two symmetric
    /// optima (the discriminator optimum there is 0). Unavailable for
    /// problems without a known solution set.
    pub fn dist_to_opt(&self, p: &Point) -> Result<f64> {
        self.check_point(p)?;
        match &self.kind {
            Kind::Quadratic(q) => {
                let (xs, ys) = q.saddle()?;
                Ok(((p.x[0] - xs).powi(2) + (p.y[0] - ys).powi(2)).sqrt())
            }
            Kind::WganLinear(w) => Ok(w.generator_dist_to_opt(&p.x)),
            _ => Err(self.unavailable("dist_to_opt")),
        }
    }

    /// This objective plus the proximal term `(strength/2)‖x − anchor‖²`,
    /// as a standalone problem with updated constants. Exact only within
    /// the quadratic family, which is closed under anchoring; other
    /// problems handle anchoring inside the solvers (the term is added to
    /// gradients directly) and report the helper as unavailable here.
    pub fn anchored(&self, anchor: &[f64], strength: f64) -> Result<MinimaxProblem> {
        self.check_x(anchor)?;
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::Config(format!(
                "anchor strength must be a nonnegative finite number, got {strength}"
            )));
        }
        match &self.kind {
            Kind::Quadratic(q) => {
                Self::affine_quadratic(q.anchored(anchor[0], strength), self.noise_sigma)
            }
            _ => Err(self.unavailable("anchored objective")),
        }
    }

    // ------------------------------------------------------------------
    // Validation helpers
    // ------------------------------------------------------------------

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.x.len() != self.dim_x || p.y.len() != self.dim_y {
            return Err(Error::Config(format!(
                "point dimensions ({}, {}) do not match problem {} ({}, {})",
                p.x.len(),
                p.y.len(),
                self.name,
                self.dim_x,
                self.dim_y
            )));
        }
        Ok(())
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim_x {
            return Err(Error::Config(format!(
                "x-block length {} does not match problem {} (dim_x = {})",
                x.len(),
                self.name,
                self.dim_x
            )));
        }
        Ok(())
    }

    fn check_y(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim_y {
            return Err(Error::Config(format!(
                "y-block length {} does not match problem {} (dim_y = {})",
                y.len(),
                self.name,
                self.dim_y
            )));
        }
        Ok(())
    }

    fn ensure_finite_scalar(&self, op: &str, v: f64) -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric {
                context: format!("{op} on {}", self.name),
                detail: format!("produced non-finite value {v}"),
            })
        }
    }

    fn ensure_finite_block(&self, op: &str, g: Vec<f64>) -> Result<Vec<f64>> {
        if g.iter().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(Error::Numeric {
                context: format!("{op} on {}", self.name),
                detail: "produced a non-finite gradient entry".into(),
            })
        }
    }

    fn ensure_finite_pair(
        &self,
        op: &str,
        gx: Vec<f64>,
        gy: Vec<f64>,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let gx = self.ensure_finite_block(op, gx)?;
        let gy = self.ensure_finite_block(op, gy)?;
        Ok((gx, gy))
    }

    fn unavailable(&self, which: &'static str) -> Error {
        Error::ClosedFormUnavailable {
            which,
            problem: self.name,
        }
    }

    /// A uniform sample from the declared test box, for invariant tests.
    pub fn sample_box_point(&self, rng: &mut RngStream) -> Point {
        let mut p = Point::zeros(self.dim_x, self.dim_y);
        for v in p.x.iter_mut() {
            *v = rng.next_range(-self.box_x, self.box_x);
        }
        for v in p.y.iter_mut() {
            *v = rng.next_range(-self.box_y, self.box_y);
        }
        p
    }
}

/// Deterministic seed for the structure of synthesized problems, derived
/// from a user-visible base seed. Exposed so harness and tests agree.
pub fn structure_seed(base: u64, salt: u64) -> u64 {
    derive_seed(base, salt)
}

fn check_noise(noise_sigma: f64) -> Result<()> {
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::Config(format!(
            "noise_sigma must be a nonnegative finite number, got {noise_sigma}"
        )));
    }
    Ok(())
}

/// Adds independent Gaussian noise with per-coordinate standard deviation
/// `σ/√dim` (total block variance `σ²`). Draws nothing when `σ = 0`.
fn add_gaussian_noise(block: &mut [f64], sigma: f64, rng: &mut RngStream) {
    if sigma == 0.0 || block.is_empty() {
        return;
    }
    let std = sigma / (block.len() as f64).sqrt();
    for v in block.iter_mut() {
        *v += std * rng.next_gaussian();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> MinimaxProblem {
        MinimaxProblem::quadratic_saddle(QuadraticSaddle::new(1.0, 1.0, 2.0).unwrap(), 0.0)
            .unwrap()
    }

    #[test]
    fn declared_constants() {
        let p = standard();
        assert_eq!(p.smoothness_l(), 2.0);
        assert_eq!(p.pl_mu(), 2.0);
        assert_eq!(p.kappa(), 1.0);
        assert_eq!((p.dim_x(), p.dim_y()), (1, 1));
    }

    #[test]
    fn gradient_example() {
        let p = standard();
        let (gx, gy) = p.grad(&Point::new(vec![1.0], vec![1.0])).unwrap();
        assert_eq!((gx[0], gy[0]), (2.0, -1.0));
    }

    #[test]
    fn zero_noise_sampling_is_exact_and_draws_nothing() {
        let p = standard();
        let pt = Point::new(vec![0.3], vec![-0.7]);
        let mut rng = RngStream::new(7, StreamId::OracleX);
        let (gx, gy) = p.sample_grad(&pt, &mut rng).unwrap();
        assert_eq!(rng.draws(), 0);
        assert_eq!((gx, gy), {
            let (ex, ey) = p.grad(&pt).unwrap();
            (ex, ey)
        });
    }

    #[test]
    fn noisy_sampling_draw_count_is_fixed() {
        let p =
            MinimaxProblem::quadratic_saddle(QuadraticSaddle::new(1.0, 1.0, 2.0).unwrap(), 1.0)
                .unwrap();
        let pt = Point::new(vec![1.0], vec![1.0]);
        let mut rng = RngStream::new(7, StreamId::OracleX);
        p.sample_grad(&pt, &mut rng).unwrap();
        // One Gaussian per coordinate, two words per Gaussian.
        assert_eq!(rng.draws(), 4);
    }

    #[test]
    fn sampled_gradient_is_unbiased() {
        let p =
            MinimaxProblem::quadratic_saddle(QuadraticSaddle::new(1.0, 1.0, 2.0).unwrap(), 1.0)
                .unwrap();
        let pt = Point::new(vec![1.0], vec![1.0]);
        let mut rng = RngStream::new(123, StreamId::OracleX);
        let reps = 100_000;
        let (mut sx, mut sy) = (0.0, 0.0);
        for _ in 0..reps {
            let (gx, gy) = p.sample_grad(&pt, &mut rng).unwrap();
            sx += gx[0];
            sy += gy[0];
        }
        let n = reps as f64;
        // Block σ = 1 ⇒ standard error of the mean is 1/√reps; allow 3 SE.
        let tol = 3.0 / n.sqrt();
        assert!((sx / n - 2.0).abs() < tol, "mean gx = {}", sx / n);
        assert!((sy / n + 1.0).abs() < tol, "mean gy = {}", sy / n);
    }

    #[test]
    fn finite_difference_matches_analytic() {
        let p = standard();
        let pt = Point::new(vec![1.0], vec![1.0]);
        let (gx, gy) = p.finite_diff_grad(&pt, 1e-6).unwrap();
        assert!((gx[0] - 2.0).abs() < 2e-6 * 2.0);
        assert!((gy[0] + 1.0).abs() < 2e-6);
    }

    #[test]
    fn constant_in_x_objective_has_zero_x_gradient() {
        // f(x, y) = −y²/2 + 5: constant in x; both finite-difference blocks
        // vanish at y = 0.
        let q = AffineQuadratic {
            a: 0.0,
            b: 0.0,
            c: 1.0,
            d: 0.0,
            e: 0.0,
            f0: 5.0,
        };
        let p = MinimaxProblem::affine_quadratic(q, 0.0).unwrap();
        let (gx, gy) = p
            .finite_diff_grad(&Point::new(vec![2.0], vec![0.0]), 1e-6)
            .unwrap();
        assert_eq!(gx, vec![0.0]);
        assert_eq!(gy, vec![0.0]);
    }

    #[test]
    fn closed_form_queries_dispatch() {
        let p = standard();
        // Φ(x) = 0.75x² ⇒ ∇Φ(0.8) = 1.2.
        let g = p.closed_form_query(ClosedFormQuery::GradPhi(&[0.8])).unwrap();
        assert!((g.vector().unwrap()[0] - 1.2).abs() < 1e-15);
        // prox with λ = 1/(2l) = 1/4 from x = 1.
        let prox = p
            .closed_form_query(ClosedFormQuery::ProxPhi { x: &[1.0], lambda: 0.25 })
            .unwrap();
        assert!((prox.vector().unwrap()[0] - 8.0 / 11.0).abs() < 1e-15);
        // y* at the origin is 0 (the y-gradient vanishes there).
        let ys = p.closed_form_query(ClosedFormQuery::YStar(&[0.0])).unwrap();
        assert_eq!(ys.vector().unwrap(), &[0.0]);
    }

    #[test]
    fn availability_flags() {
        let p = standard();
        for k in [
            ClosedFormKind::YStar,
            ClosedFormKind::Phi,
            ClosedFormKind::GradPhi,
            ClosedFormKind::Psi,
            ClosedFormKind::PhiStar,
            ClosedFormKind::ProxPhi,
        ] {
            assert!(p.has_closed_form(k), "{k:?} should be available");
        }
        let deg = MinimaxProblem::degenerate_quadratic(3, 4, 2, 1.0, 11, 0.0).unwrap();
        assert!(deg.has_closed_form(ClosedFormKind::Phi));
        assert!(!deg.has_closed_form(ClosedFormKind::Psi));
        assert!(matches!(
            deg.psi(&[0.0; 4]),
            Err(Error::ClosedFormUnavailable { .. })
        ));
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let p = standard();
        let bad = Point::new(vec![1.0, 2.0], vec![1.0]);
        assert!(matches!(p.grad(&bad), Err(Error::Config(_))));
        assert!(matches!(p.phi(&[1.0, 2.0]), Err(Error::Config(_))));
    }

    #[test]
    fn anchoring_updates_constants() {
        let p = standard();
        let anchored = p.anchored(&[0.0], 4.0).unwrap();
        // a + p = 5 dominates: l = 5, μ unchanged.
        assert_eq!(anchored.smoothness_l(), 5.0);
        assert_eq!(anchored.pl_mu(), 2.0);
        let wgan = MinimaxProblem::linear_wgan(10, true).unwrap();
        assert!(wgan.anchored(&[0.0, 0.0], 4.0).is_err());
    }

    #[test]
    fn saddle_distance_for_quadratic() {
        let p = standard();
        let d = p.dist_to_opt(&Point::new(vec![3.0], vec![4.0])).unwrap();
        assert!((d - 5.0).abs() < 1e-15);
    }
}
