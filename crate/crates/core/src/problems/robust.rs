//! Robust nonlinear regression: a two-hidden-layer ReLU network against
//! adversarially perturbed targets.

use super::mlp::Mlp;
use crate::rng::{derive_seed, RngStream, StreamId};
use crate::{Error, Result};

/// Synthesis and oracle parameters for [`RobustRegression`].
///
/// Defaults give the desk-scale instance: 200 points of 20-dimensional
/// standard-Gaussian features with noisy linear targets, widths 16 and 8,
/// λ = 1.
#[derive(Debug, Clone)]
pub struct RobustRegressionConfig {
    pub n: usize,
    pub input_dim: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    /// Target-perturbation penalty weight; must exceed `1/n` so the
    /// maximization block is strongly concave.
    pub lambda: f64,
    /// Standard deviation of the target noise around the linear teacher.
    pub data_noise: f64,
    /// Seed fixing the synthetic dataset (independent of run seeds).
    pub data_seed: u64,
    /// Mini-batch size of the stochastic oracle (with replacement).
    pub batch_size: usize,
}

impl Default for RobustRegressionConfig {
    fn default() -> Self {
        RobustRegressionConfig {
            n: 200,
            input_dim: 20,
            hidden1: 16,
            hidden2: 8,
            lambda: 1.0,
            data_noise: 0.1,
            data_seed: 1,
            batch_size: 32,
        }
    }
}

/// `f(x, y) = (1/n) Σᵢ ½(net_x(zᵢ) − yᵢ)² − (λ/2)‖y − y₀‖²`
/// where `x` holds the flattened network parameters and `y` the
/// adversarial targets.
///
/// For fixed `x` the maximization block is the separable concave quadratic
/// `½(netᵢ − yᵢ)²/n − (λ/2)(yᵢ − y₀ᵢ)²` per target, with curvature
/// `1/n − λ < 0`; the strong-concavity (and PL) modulus is therefore
/// `λ − 1/n`, and the best response and `Φ` are exact:
/// `y*ᵢ = (λ y₀ᵢ − netᵢ/n)/(λ − 1/n)` and
/// `Φ(x) = λ/(2(nλ − 1)) Σᵢ (netᵢ − y₀ᵢ)²` — a rescaled clean-data loss.
#[derive(Debug, Clone)]
pub struct RobustRegression {
    net: Mlp,
    n: usize,
    input_dim: usize,
    lambda: f64,
    batch_size: usize,
    /// Row-major `n × input_dim` design matrix.
    features: Vec<f64>,
    /// Clean targets `y₀`.
    targets0: Vec<f64>,
}

impl RobustRegression {
    /// Builds the synthetic instance: standard-Gaussian features, targets
    /// from a random linear teacher plus Gaussian noise, all derived
    /// deterministically from `cfg.data_seed`.
    pub fn synthesize(cfg: RobustRegressionConfig) -> Result<Self> {
        let d = cfg.input_dim;
        if cfg.n == 0 || d == 0 {
            return Err(Error::Config("dataset dimensions must be positive".into()));
        }
        if !(cfg.data_noise.is_finite() && cfg.data_noise >= 0.0) {
            return Err(Error::Config(format!(
                "data_noise must be nonnegative, got {}",
                cfg.data_noise
            )));
        }
        let mut feat_rng = RngStream::new(derive_seed(cfg.data_seed, 0), StreamId::Data);
        let mut features = vec![0.0; cfg.n * d];
        for v in features.iter_mut() {
            *v = feat_rng.next_gaussian();
        }
        let mut teacher_rng = RngStream::new(derive_seed(cfg.data_seed, 1), StreamId::Data);
        let scale = 1.0 / (d as f64).sqrt();
        let teacher: Vec<f64> = (0..d).map(|_| scale * teacher_rng.next_gaussian()).collect();
        let mut noise_rng = RngStream::new(derive_seed(cfg.data_seed, 2), StreamId::Data);
        let mut targets0 = vec![0.0; cfg.n];
        for (i, t) in targets0.iter_mut().enumerate() {
            let row = &features[i * d..(i + 1) * d];
            *t = crate::linalg::dot(row, &teacher) + cfg.data_noise * noise_rng.next_gaussian();
        }
        Self::from_data(features, targets0, cfg)
    }

    /// Builds the instance over caller-provided data. `features` is row-major
    /// with `cfg.input_dim` columns; the row count is taken from `targets`.
    pub fn from_data(
        features: Vec<f64>,
        targets: Vec<f64>,
        cfg: RobustRegressionConfig,
    ) -> Result<Self> {
        let n = targets.len();
        let d = cfg.input_dim;
        if n == 0 || d == 0 {
            return Err(Error::Config("dataset dimensions must be positive".into()));
        }
        if features.len() != n * d {
            return Err(Error::Config(format!(
                "feature matrix has {} entries, expected {} rows × {} columns",
                features.len(),
                n,
                d
            )));
        }
        if features.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Config("dataset contains non-finite entries".into()));
        }
        if !(cfg.lambda.is_finite() && cfg.lambda > 1.0 / n as f64) {
            return Err(Error::Config(format!(
                "lambda = {} must exceed 1/n = {} for a strongly concave target block",
                cfg.lambda,
                1.0 / n as f64
            )));
        }
        if cfg.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        let net = Mlp::new(vec![d, cfg.hidden1, cfg.hidden2, 1])?;
        Ok(RobustRegression {
            net,
            n,
            input_dim: d,
            lambda: cfg.lambda,
            batch_size: cfg.batch_size,
            features,
            targets0: targets,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim_theta(&self) -> usize {
        self.net.param_count()
    }

    /// Strong-concavity (= PL) modulus of the target block.
    pub fn pl_mu(&self) -> f64 {
        self.lambda - 1.0 / self.n as f64
    }

    pub fn clean_targets(&self) -> &[f64] {
        &self.targets0
    }

    pub fn init_theta(&self, rng: &mut RngStream) -> Vec<f64> {
        self.net.init_params(rng)
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.input_dim..(i + 1) * self.input_dim]
    }

    fn output(&self, x: &[f64], i: usize) -> f64 {
        self.net.forward(x, self.row(i)).out
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.n as f64;
        let mut data = 0.0;
        let mut penalty = 0.0;
        for i in 0..self.n {
            let r = self.output(x, i) - y[i];
            data += 0.5 * r * r;
            let dy = y[i] - self.targets0[i];
            penalty += 0.5 * self.lambda * dy * dy;
        }
        data / n - penalty
    }

    pub fn grad(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n as f64;
        let mut gx = vec![0.0; self.dim_theta()];
        let mut gy = vec![0.0; self.n];
        for i in 0..self.n {
            let fwd = self.net.forward(x, self.row(i));
            let r = fwd.out - y[i];
            self.net.backprop(x, &fwd, r / n, &mut gx);
            gy[i] = -r / n - self.lambda * (y[i] - self.targets0[i]);
        }
        (gx, gy)
    }

    /// Mini-batch gradient over `batch_size` indices drawn with
    /// replacement (one word per index). The y-penalty term is
    /// deterministic and always exact.
    pub fn sample_grad(&self, x: &[f64], y: &[f64], rng: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
        let m = self.batch_size as f64;
        let mut gx = vec![0.0; self.dim_theta()];
        let mut gy = vec![0.0; self.n];
        for _ in 0..self.batch_size {
            let i = rng.next_index(self.n);
            let fwd = self.net.forward(x, self.row(i));
            let r = fwd.out - y[i];
            self.net.backprop(x, &fwd, r / m, &mut gx);
            gy[i] -= r / m;
        }
        for i in 0..self.n {
            gy[i] -= self.lambda * (y[i] - self.targets0[i]);
        }
        (gx, gy)
    }

    pub fn sample_grad_x(&self, x: &[f64], y: &[f64], rng: &mut RngStream) -> Vec<f64> {
        let m = self.batch_size as f64;
        let mut gx = vec![0.0; self.dim_theta()];
        for _ in 0..self.batch_size {
            let i = rng.next_index(self.n);
            let fwd = self.net.forward(x, self.row(i));
            self.net.backprop(x, &fwd, (fwd.out - y[i]) / m, &mut gx);
        }
        gx
    }

    pub fn sample_grad_y(&self, x: &[f64], y: &[f64], rng: &mut RngStream) -> Vec<f64> {
        let m = self.batch_size as f64;
        let mut gy = vec![0.0; self.n];
        for _ in 0..self.batch_size {
            let i = rng.next_index(self.n);
            gy[i] -= (self.output(x, i) - y[i]) / m;
        }
        for i in 0..self.n {
            gy[i] -= self.lambda * (y[i] - self.targets0[i]);
        }
        gy
    }

    pub fn y_star(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n as f64;
        let mu = self.pl_mu();
        (0..self.n)
            .map(|i| (self.lambda * self.targets0[i] - self.output(x, i) / n) / mu)
            .collect()
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        let n = self.n as f64;
        let scale = self.lambda / (2.0 * (n * self.lambda - 1.0));
        let mut sum = 0.0;
        for i in 0..self.n {
            let r = self.output(x, i) - self.targets0[i];
            sum += r * r;
        }
        scale * sum
    }

    pub fn grad_phi(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n as f64;
        let scale = self.lambda / (n * self.lambda - 1.0);
        let mut g = vec![0.0; self.dim_theta()];
        for i in 0..self.n {
            let fwd = self.net.forward(x, self.row(i));
            self.net.backprop(x, &fwd, scale * (fwd.out - self.targets0[i]), &mut g);
        }
        g
    }

    /// Smallest kink distance of any hidden unit over the dataset at `x`;
    /// gradient tests resample when this is below their threshold.
    pub fn min_kink_distance(&self, x: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| self.net.forward(x, self.row(i)).min_abs_pre)
            .fold(f64::INFINITY, f64::min)
    }

    /// Heuristic curvature scale on the declared box. The ReLU objective is
    /// piecewise smooth rather than globally smooth; this constant bounds
    /// sampled difference quotients with wide margin and feeds the
    /// theorem-rule stepsize constructors.
    pub fn declared_smoothness(&self) -> f64 {
        1000.0
    }

    /// Coarse oracle-noise bound, shrinking as `1/√batch`.
    pub fn declared_noise(&self) -> f64 {
        200.0 / (self.batch_size as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn small() -> RobustRegression {
        RobustRegression::synthesize(RobustRegressionConfig {
            n: 12,
            input_dim: 4,
            hidden1: 5,
            hidden2: 3,
            lambda: 1.0,
            data_noise: 0.1,
            data_seed: 3,
            batch_size: 4,
        })
        .unwrap()
    }

    fn desk() -> RobustRegression {
        RobustRegression::synthesize(RobustRegressionConfig::default()).unwrap()
    }

    #[test]
    fn desk_scale_dimensions() {
        let r = desk();
        assert_eq!(r.dim_theta(), 481);
        assert_eq!(r.n(), 200);
        assert!((r.pl_mu() - 0.995).abs() < 1e-12);
    }

    #[test]
    fn rejects_weak_lambda() {
        let cfg = RobustRegressionConfig {
            n: 10,
            lambda: 0.05,
            ..RobustRegressionConfig::default()
        };
        assert!(RobustRegression::synthesize(cfg).is_err());
    }

    #[test]
    fn synthesis_is_reproducible() {
        let a = small();
        let b = small();
        assert_eq!(a.features, b.features);
        assert_eq!(a.targets0, b.targets0);
    }

    #[test]
    fn backprop_matches_central_differences() {
        let r = small();
        let mut rng = RngStream::new(20, StreamId::Init);
        let (x, y) = loop {
            let x = r.init_theta(&mut rng);
            // Perturbed targets, away from the clean optimum.
            let y: Vec<f64> = r.targets0.iter().map(|t| t + 0.3).collect();
            if r.min_kink_distance(&x) > 1e-4 {
                break (x, y);
            }
        };
        let (gx, gy) = r.grad(&x, &y);
        let h = 1e-6;
        for i in (0..r.dim_theta()).step_by(7) {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (r.value(&up, &y) - r.value(&down, &y)) / (2.0 * h);
            assert!(
                (fd - gx[i]).abs() <= 1e-5 * fd.abs().max(1.0),
                "θ[{i}]: fd {fd} vs analytic {}",
                gx[i]
            );
        }
        for i in 0..r.n() {
            let mut up = y.clone();
            let mut down = y.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (r.value(&x, &up) - r.value(&x, &down)) / (2.0 * h);
            assert!(
                (fd - gy[i]).abs() <= 1e-6 * fd.abs().max(1.0),
                "y[{i}]: fd {fd} vs analytic {}",
                gy[i]
            );
        }
    }

    #[test]
    fn best_response_attains_phi() {
        let r = small();
        let mut rng = RngStream::new(4, StreamId::Init);
        let x = r.init_theta(&mut rng);
        let ys = r.y_star(&x);
        let (_, gy) = r.grad(&x, &ys);
        assert!(linalg::norm(&gy) < 1e-12);
        assert!((r.value(&x, &ys) - r.phi(&x)).abs() < 1e-12);
        // PL holds with equality (constant-curvature concave block).
        let y: Vec<f64> = r.targets0.iter().map(|t| t - 0.8).collect();
        let (_, g) = r.grad(&x, &y);
        let lhs = linalg::norm_sq(&g);
        let rhs = 2.0 * r.pl_mu() * (r.phi(&x) - r.value(&x, &y));
        assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn primal_gradient_matches_central_differences() {
        let r = small();
        let mut rng = RngStream::new(6, StreamId::Init);
        let x = loop {
            let x = r.init_theta(&mut rng);
            if r.min_kink_distance(&x) > 1e-4 {
                break x;
            }
        };
        let g = r.grad_phi(&x);
        let h = 1e-6;
        for i in (0..r.dim_theta()).step_by(11) {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (r.phi(&up) - r.phi(&down)) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-5 * fd.abs().max(1.0), "θ[{i}]");
        }
    }

    #[test]
    fn minibatch_is_unbiased_and_draw_counted() {
        let r = small();
        let mut init_rng = RngStream::new(8, StreamId::Init);
        let x = r.init_theta(&mut init_rng);
        let y: Vec<f64> = r.targets0.iter().map(|t| t + 0.2).collect();
        let (ex, ey) = r.grad(&x, &y);
        let mut rng = RngStream::new(10, StreamId::OracleX);
        r.sample_grad(&x, &y, &mut rng);
        assert_eq!(rng.draws(), 4); // one word per index draw
        let reps = 40_000;
        let mut mx = vec![0.0; ex.len()];
        let mut my = vec![0.0; ey.len()];
        for _ in 0..reps {
            let (gx, gy) = r.sample_grad(&x, &y, &mut rng);
            linalg::axpy(1.0, &gx, &mut mx);
            linalg::axpy(1.0, &gy, &mut my);
        }
        let n = reps as f64;
        // Aggregate check: the averaged estimator should be close to the
        // exact gradient in norm relative to the sampling noise.
        let dx = {
            let mut d = 0.0;
            for (m, e) in mx.iter().zip(&ex) {
                d += (m / n - e) * (m / n - e);
            }
            d.sqrt()
        };
        let dy = {
            let mut d = 0.0;
            for (m, e) in my.iter().zip(&ey) {
                d += (m / n - e) * (m / n - e);
            }
            d.sqrt()
        };
        assert!(dx < 0.1, "x-block estimator bias-norm {dx}");
        assert!(dy < 0.1, "y-block estimator bias-norm {dy}");
    }
}
