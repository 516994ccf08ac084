//! WGAN with linear generator and quadratic discriminator on 1-D Gaussian
//! data, regularized to make the discriminator block strongly concave.

use crate::rng::RngStream;
use crate::{Error, Result};

/// `f(μ, σ, φ₁, φ₂) = φ₁(μ̂ − μ) + φ₂(μ̂² + σ̂² − μ² − σ²) − λ(φ₁² + φ₂²)`.
///
/// This is the exact expectation of the WGAN game with generator
/// `G(z) = μ + σz`, discriminator `D(w) = φ₁w + φ₂w²`, data `w ~ N(μ̂, σ̂²)`
/// and latent `z ~ N(0, 1)`. The generator block `x = (μ, σ)` is minimized,
/// the discriminator block `y = (φ₁, φ₂)` maximized. Global saddles sit at
/// `(μ̂, ±σ̂)` with `φ = 0`; the objective is symmetric under `σ → −σ`.
///
/// The mini-batch oracle draws `batch_size` data samples and `batch_size`
/// latent samples per call (in that order; `4·batch_size` words) and is
/// unbiased for the expectation gradient.
#[derive(Debug, Clone)]
pub struct LinearWgan {
    mu_hat: f64,
    sigma_hat: f64,
    lambda: f64,
    batch_size: usize,
    deterministic: bool,
}

impl LinearWgan {
    pub fn new(
        mu_hat: f64,
        sigma_hat: f64,
        lambda: f64,
        batch_size: usize,
        deterministic: bool,
    ) -> Result<Self> {
        if !(mu_hat.is_finite() && sigma_hat.is_finite()) {
            return Err(Error::Config("WGAN data parameters must be finite".into()));
        }
        if sigma_hat < 0.0 {
            return Err(Error::Config(format!("data scale σ̂ must be nonnegative, got {sigma_hat}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Config(format!(
                "discriminator regularization λ must be positive, got {lambda}"
            )));
        }
        if batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        Ok(LinearWgan {
            mu_hat,
            sigma_hat,
            lambda,
            batch_size,
            deterministic,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Second moment of the data distribution.
    fn data_m2(&self) -> f64 {
        self.mu_hat * self.mu_hat + self.sigma_hat * self.sigma_hat
    }

    /// Moment mismatches `(μ̂ − μ, μ̂² + σ̂² − μ² − σ²)`.
    fn mismatch(&self, x: &[f64]) -> (f64, f64) {
        (
            self.mu_hat - x[0],
            self.data_m2() - x[0] * x[0] - x[1] * x[1],
        )
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let (m1, m2) = self.mismatch(x);
        y[0] * m1 + y[1] * m2 - self.lambda * (y[0] * y[0] + y[1] * y[1])
    }

    pub fn grad(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (m1, m2) = self.mismatch(x);
        let gx = vec![
            -y[0] - 2.0 * y[1] * x[0],
            -2.0 * y[1] * x[1],
        ];
        let gy = vec![
            m1 - 2.0 * self.lambda * y[0],
            m2 - 2.0 * self.lambda * y[1],
        ];
        (gx, gy)
    }

    /// Mini-batch stochastic gradient. In deterministic mode this is the
    /// exact gradient and consumes no randomness.
    pub fn sample_grad(&self, x: &[f64], y: &[f64], rng: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
        if self.deterministic {
            return self.grad(x, y);
        }
        let m = self.batch_size as f64;
        // Data batch: empirical first and second moments of w ~ N(μ̂, σ̂²).
        let (mut a1, mut a2) = (0.0, 0.0);
        for _ in 0..self.batch_size {
            let a = self.mu_hat + self.sigma_hat * rng.next_gaussian();
            a1 += a;
            a2 += a * a;
        }
        a1 /= m;
        a2 /= m;
        // Latent batch through the generator g = μ + σz (reparameterized, so
        // the generator gradient flows through the same samples).
        let (mut g1, mut g2, mut z1, mut gz) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..self.batch_size {
            let z = rng.next_gaussian();
            let g = x[0] + x[1] * z;
            g1 += g;
            g2 += g * g;
            z1 += z;
            gz += g * z;
        }
        g1 /= m;
        g2 /= m;
        z1 /= m;
        gz /= m;
        let gx = vec![
            -(y[0] + 2.0 * y[1] * g1),
            -(y[0] * z1 + 2.0 * y[1] * gz),
        ];
        let gy = vec![
            a1 - g1 - 2.0 * self.lambda * y[0],
            a2 - g2 - 2.0 * self.lambda * y[1],
        ];
        (gx, gy)
    }

    /// Best discriminator response `φ*(x) = mismatch/(2λ)`.
    pub fn y_star(&self, x: &[f64]) -> Vec<f64> {
        let (m1, m2) = self.mismatch(x);
        vec![m1 / (2.0 * self.lambda), m2 / (2.0 * self.lambda)]
    }

    /// `Φ(x) = (m1² + m2²)/(4λ)` — the squared moment mismatch.
    pub fn phi(&self, x: &[f64]) -> f64 {
        let (m1, m2) = self.mismatch(x);
        (m1 * m1 + m2 * m2) / (4.0 * self.lambda)
    }

    pub fn grad_phi(&self, x: &[f64]) -> Vec<f64> {
        let (m1, m2) = self.mismatch(x);
        vec![
            -(m1 + 2.0 * x[0] * m2) / (2.0 * self.lambda),
            -x[1] * m2 / self.lambda,
        ]
    }

    /// Distance of the generator parameters to the nearer of the two
    /// symmetric optima `(μ̂, ±σ̂)`.
    pub fn generator_dist_to_opt(&self, x: &[f64]) -> f64 {
        let dm = x[0] - self.mu_hat;
        let plus = (x[1] - self.sigma_hat).hypot(dm);
        let minus = (x[1] + self.sigma_hat).hypot(dm);
        plus.min(minus)
    }

    /// Per-block gradient Lipschitz constant on `‖x‖∞ ≤ bx`, `‖y‖∞ ≤ by`:
    /// the cross-block Hessian is bounded by `√(1 + 8bx²)` and the
    /// generator-block curvature by `2by`.
    pub fn smoothness_on_box(&self, bx: f64, by: f64) -> f64 {
        (2.0 * by)
            .max((1.0 + 8.0 * bx * bx).sqrt())
            .max(2.0 * self.lambda)
    }

    /// Coarse bound on the oracle noise scale: dominated by the quartic
    /// moment terms at the box corners, shrinking as `1/√batch`.
    pub fn declared_noise(&self) -> f64 {
        if self.deterministic {
            0.0
        } else {
            let bx: f64 = 10.0;
            let by: f64 = 10.0;
            8.0 * bx * bx * by / (self.batch_size as f64).sqrt()
        }
    }
}
