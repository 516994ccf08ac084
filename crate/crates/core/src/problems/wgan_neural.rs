//! WGAN variant whose generator is a small ReLU network. The discriminator,
//! data distribution, and regularization match the linear-generator game.

use super::mlp::Mlp;
use crate::rng::{derive_seed, RngStream, StreamId};
use crate::{Error, Result};

/// Generator `G_θ(z)`: a one-hidden-layer ReLU network over a scalar
/// latent. The objective is defined against a *fixed* latent sample
/// `z₁…z_N` (drawn once from the structure seed), so the generator moments
/// `m₁ = (1/N)ΣG(zᵢ)`, `m₂ = (1/N)ΣG(zᵢ)²` are deterministic functions
/// of `θ` and the game reduces to the linear-WGAN form with `(m₁, m₂)`
/// in place of `(μ, μ² + σ²)`:
///
/// `f(θ, φ) = φ₁(μ̂ − m₁) + φ₂(μ̂² + σ̂² − m₂) − λ‖φ‖²`.
///
/// `Φ`, `y*`, and `∇Φ` therefore stay exact (almost everywhere in `θ`).
/// The stochastic oracle mini-batches latent indices (with replacement)
/// and fresh data draws — `batch_size` index words plus `2·batch_size`
/// Gaussian words per call.
#[derive(Debug, Clone)]
pub struct NeuralWgan {
    net: Mlp,
    mu_hat: f64,
    sigma_hat: f64,
    lambda: f64,
    latents: Vec<f64>,
    batch_size: usize,
    deterministic: bool,
}

impl NeuralWgan {
    pub fn new(
        hidden: usize,
        latent_count: usize,
        batch_size: usize,
        deterministic: bool,
        structure_seed: u64,
    ) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::Config("generator needs at least one hidden unit".into()));
        }
        if latent_count == 0 {
            return Err(Error::Config("latent sample must be nonempty".into()));
        }
        if batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        let net = Mlp::new(vec![1, hidden, 1])?;
        let mut rng = RngStream::new(derive_seed(structure_seed, 0), StreamId::Data);
        let latents = (0..latent_count).map(|_| rng.next_gaussian()).collect();
        Ok(NeuralWgan {
            net,
            mu_hat: 0.0,
            sigma_hat: 0.1,
            lambda: 1e-3,
            latents,
            batch_size,
            deterministic,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim_theta(&self) -> usize {
        self.net.param_count()
    }

    pub fn init_theta(&self, rng: &mut RngStream) -> Vec<f64> {
        self.net.init_params(rng)
    }

    fn data_m2(&self) -> f64 {
        self.mu_hat * self.mu_hat + self.sigma_hat * self.sigma_hat
    }

    fn generate(&self, theta: &[f64], z: f64) -> f64 {
        self.net.forward(theta, &[z]).out
    }

    /// Empirical generator moments over the fixed latent sample.
    fn moments(&self, theta: &[f64]) -> (f64, f64) {
        let n = self.latents.len() as f64;
        let (mut m1, mut m2) = (0.0, 0.0);
        for &z in &self.latents {
            let g = self.generate(theta, z);
            m1 += g;
            m2 += g * g;
        }
        (m1 / n, m2 / n)
    }

    /// Moment mismatches `(μ̂ − m₁, μ̂² + σ̂² − m₂)`.
    fn mismatch(&self, theta: &[f64]) -> (f64, f64) {
        let (m1, m2) = self.moments(theta);
        (self.mu_hat - m1, self.data_m2() - m2)
    }

    pub fn value(&self, theta: &[f64], phi: &[f64]) -> f64 {
        let (d1, d2) = self.mismatch(theta);
        phi[0] * d1 + phi[1] * d2 - self.lambda * (phi[0] * phi[0] + phi[1] * phi[1])
    }

    pub fn grad(&self, theta: &[f64], phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.latents.len() as f64;
        let mut gt = vec![0.0; self.dim_theta()];
        let (mut m1, mut m2) = (0.0, 0.0);
        for &z in &self.latents {
            let fwd = self.net.forward(theta, &[z]);
            let g = fwd.out;
            m1 += g;
            m2 += g * g;
            // ∂/∂θ of −(φ₁ G + φ₂ G²)/N.
            self.net
                .backprop(theta, &fwd, -(phi[0] + 2.0 * phi[1] * g) / n, &mut gt);
        }
        m1 /= n;
        m2 /= n;
        let gy = vec![
            self.mu_hat - m1 - 2.0 * self.lambda * phi[0],
            self.data_m2() - m2 - 2.0 * self.lambda * phi[1],
        ];
        (gt, gy)
    }

    pub fn sample_grad(
        &self,
        theta: &[f64],
        phi: &[f64],
        rng: &mut RngStream,
    ) -> (Vec<f64>, Vec<f64>) {
        if self.deterministic {
            return self.grad(theta, phi);
        }
        let m = self.batch_size as f64;
        let mut gt = vec![0.0; self.dim_theta()];
        let (mut g1, mut g2) = (0.0, 0.0);
        for _ in 0..self.batch_size {
            let z = self.latents[rng.next_index(self.latents.len())];
            let fwd = self.net.forward(theta, &[z]);
            let g = fwd.out;
            g1 += g;
            g2 += g * g;
            self.net
                .backprop(theta, &fwd, -(phi[0] + 2.0 * phi[1] * g) / m, &mut gt);
        }
        g1 /= m;
        g2 /= m;
        let (mut a1, mut a2) = (0.0, 0.0);
        for _ in 0..self.batch_size {
            let a = self.mu_hat + self.sigma_hat * rng.next_gaussian();
            a1 += a;
            a2 += a * a;
        }
        a1 /= m;
        a2 /= m;
        let gy = vec![
            a1 - g1 - 2.0 * self.lambda * phi[0],
            a2 - g2 - 2.0 * self.lambda * phi[1],
        ];
        (gt, gy)
    }

    pub fn y_star(&self, theta: &[f64]) -> Vec<f64> {
        let (d1, d2) = self.mismatch(theta);
        vec![d1 / (2.0 * self.lambda), d2 / (2.0 * self.lambda)]
    }

    pub fn phi(&self, theta: &[f64]) -> f64 {
        let (d1, d2) = self.mismatch(theta);
        (d1 * d1 + d2 * d2) / (4.0 * self.lambda)
    }

    pub fn grad_phi(&self, theta: &[f64]) -> Vec<f64> {
        let n = self.latents.len() as f64;
        let (d1, d2) = self.mismatch(theta);
        let mut g = vec![0.0; self.dim_theta()];
        for &z in &self.latents {
            let fwd = self.net.forward(theta, &[z]);
            self.net.backprop(
                theta,
                &fwd,
                -(d1 + 2.0 * d2 * fwd.out) / (2.0 * self.lambda * n),
                &mut g,
            );
        }
        g
    }

    /// Smallest kink distance of any hidden unit over the latent sample.
    pub fn min_kink_distance(&self, theta: &[f64]) -> f64 {
        self.latents
            .iter()
            .map(|&z| self.net.forward(theta, &[z]).min_abs_pre)
            .fold(f64::INFINITY, f64::min)
    }

    /// Heuristic curvature scale on the declared box (the ReLU generator is
    /// piecewise smooth; sampled difference quotients stay well below this).
    pub fn declared_smoothness(&self, _bx: f64, by: f64) -> f64 {
        (2.0 * by).max(400.0)
    }

    pub fn declared_noise(&self) -> f64 {
        if self.deterministic {
            0.0
        } else {
            400.0 / (self.batch_size as f64).sqrt()
        }
    }
}
