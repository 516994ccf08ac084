//! Minimal scalar-output ReLU multilayer perceptron with hand-derived
//! backpropagation, shared by the network-based objectives. No autodiff:
//! gradients here are the reference implementation that the
//! finite-difference oracle checks in tests.

use crate::rng::RngStream;
use crate::{Error, Result};

/// The ReLU subgradient at 0 is defined as 0 throughout.
fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// Fully-connected ReLU network with linear scalar output.
///
/// Parameters are flattened layer by layer, weights (row-major,
/// `out × in`) before biases. Hidden layers apply ReLU; the final layer is
/// linear and must have width 1.
#[derive(Debug, Clone)]
pub(crate) struct Mlp {
    sizes: Vec<usize>,
    /// `(weight_offset, bias_offset)` into the flat parameter vector,
    /// one entry per layer.
    offsets: Vec<(usize, usize)>,
    param_count: usize,
}

/// Cached forward pass: post-activation values per layer
/// (`acts[0]` is the input), the scalar output, and the distance of the
/// closest hidden preactivation to its ReLU kink.
#[derive(Debug, Clone)]
pub(crate) struct MlpForward {
    acts: Vec<Vec<f64>>,
    pub out: f64,
    pub min_abs_pre: f64,
}

impl Mlp {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        if *sizes.last().unwrap() != 1 {
            return Err(Error::Config("network output must be scalar".into()));
        }
        let mut offsets = Vec::with_capacity(sizes.len() - 1);
        let mut off = 0;
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            offsets.push((off, off + fan_in * fan_out));
            off += fan_in * fan_out + fan_out;
        }
        Ok(Mlp {
            sizes,
            offsets,
            param_count: off,
        })
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// He-style initialization: weights `N(0, 2/fan_in)`, biases zero.
    pub fn init_params(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut params = vec![0.0; self.param_count];
        for (layer, &(w_off, _)) in self.offsets.iter().enumerate() {
            let fan_in = self.sizes[layer] as f64;
            let std = (2.0 / fan_in).sqrt();
            let count = self.sizes[layer] * self.sizes[layer + 1];
            for p in params[w_off..w_off + count].iter_mut() {
                *p = std * rng.next_gaussian();
            }
        }
        params
    }

    pub fn forward(&self, params: &[f64], input: &[f64]) -> MlpForward {
        debug_assert_eq!(params.len(), self.param_count);
        debug_assert_eq!(input.len(), self.sizes[0]);
        let mut acts = Vec::with_capacity(self.layers());
        acts.push(input.to_vec());
        let mut min_abs_pre = f64::INFINITY;
        let mut out = 0.0;
        for layer in 0..self.layers() {
            let (w_off, b_off) = self.offsets[layer];
            let (fan_in, fan_out) = (self.sizes[layer], self.sizes[layer + 1]);
            let hidden = layer < self.layers() - 1;
            let prev = &acts[layer];
            let mut next = vec![0.0; fan_out];
            for j in 0..fan_out {
                let row = &params[w_off + j * fan_in..w_off + (j + 1) * fan_in];
                let mut pre = params[b_off + j];
                for (w, a) in row.iter().zip(prev) {
                    pre += w * a;
                }
                if hidden {
                    min_abs_pre = min_abs_pre.min(pre.abs());
                    next[j] = relu(pre);
                } else {
                    out = pre;
                }
            }
            if hidden {
                acts.push(next);
            }
        }
        MlpForward {
            acts,
            out,
            min_abs_pre,
        }
    }

    /// Accumulates `upstream · ∂out/∂params` into `grad` using the cached
    /// forward pass.
    pub fn backprop(&self, params: &[f64], fwd: &MlpForward, upstream: f64, grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.param_count);
        let mut delta = vec![upstream];
        for layer in (0..self.layers()).rev() {
            let (w_off, b_off) = self.offsets[layer];
            let (fan_in, fan_out) = (self.sizes[layer], self.sizes[layer + 1]);
            let inputs = &fwd.acts[layer];
            let mut delta_prev = vec![0.0; fan_in];
            for j in 0..fan_out {
                let dj = delta[j];
                if dj != 0.0 {
                    let w_row = w_off + j * fan_in;
                    for k in 0..fan_in {
                        grad[w_row + k] += dj * inputs[k];
                        delta_prev[k] += dj * params[w_row + k];
                    }
                    grad[b_off + j] += dj;
                }
            }
            if layer > 0 {
                // The input to this layer was ReLU output; its subgradient
                // is the indicator of a strictly positive activation.
                for (dp, a) in delta_prev.iter_mut().zip(inputs) {
                    if *a <= 0.0 {
                        *dp = 0.0;
                    }
                }
                delta = delta_prev;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamId;

    #[test]
    fn layout_and_count() {
        let net = Mlp::new(vec![20, 16, 8, 1]).unwrap();
        assert_eq!(net.param_count(), 20 * 16 + 16 + 16 * 8 + 8 + 8 + 1);
        assert!(Mlp::new(vec![4]).is_err());
        assert!(Mlp::new(vec![4, 0, 1]).is_err());
        assert!(Mlp::new(vec![4, 3]).is_err());
    }

    #[test]
    fn backprop_matches_central_differences() {
        let net = Mlp::new(vec![2, 3, 1]).unwrap();
        let mut rng = RngStream::new(42, StreamId::Init);
        let params = net.init_params(&mut rng);
        let input = [0.7, -0.4];
        let fwd = net.forward(&params, &input);
        assert!(
            fwd.min_abs_pre > 1e-4,
            "test point too close to a kink; pick another seed"
        );
        let mut grad = vec![0.0; net.param_count()];
        net.backprop(&params, &fwd, 1.0, &mut grad);
        let h = 1e-6;
        for i in 0..net.param_count() {
            let mut up = params.clone();
            let mut down = params.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (net.forward(&up, &input).out - net.forward(&down, &input).out) / (2.0 * h);
            assert!(
                (fd - grad[i]).abs() < 1e-6 * fd.abs().max(1.0),
                "param {i}: fd {fd} vs backprop {}",
                grad[i]
            );
        }
    }

    #[test]
    fn upstream_scales_linearly() {
        let net = Mlp::new(vec![2, 3, 1]).unwrap();
        let mut rng = RngStream::new(7, StreamId::Init);
        let params = net.init_params(&mut rng);
        let fwd = net.forward(&params, &[1.0, 2.0]);
        let mut g1 = vec![0.0; net.param_count()];
        let mut g2 = vec![0.0; net.param_count()];
        net.backprop(&params, &fwd, 1.0, &mut g1);
        net.backprop(&params, &fwd, -2.5, &mut g2);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((b + 2.5 * a).abs() < 1e-12);
        }
    }

    #[test]
    fn relu_subgradient_at_zero_is_zero() {
        // One unit with weight 1, bias 0: at input 0 the preactivation is
        // exactly 0 and the downstream path must carry no gradient to the
        // first-layer parameters.
        let net = Mlp::new(vec![1, 1, 1]).unwrap();
        let params = vec![1.0, 0.0, 1.0, 0.0]; // W1, b1, w2, b2
        let fwd = net.forward(&params, &[0.0]);
        assert_eq!(fwd.out, 0.0);
        let mut grad = vec![0.0; 4];
        net.backprop(&params, &fwd, 1.0, &mut grad);
        // ∂out/∂w2 = a1 = 0, ∂out/∂b2 = 1; first layer blocked by the mask.
        assert_eq!(grad, vec![0.0, 0.0, 0.0, 1.0]);
    }
}
