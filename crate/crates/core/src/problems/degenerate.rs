//! Quadratic coupling with singular dual curvature: concave but not
//! strongly concave in `y`, yet PL with an affine argmax subspace.

use crate::linalg::{self, DenseMat};
use crate::rng::{derive_seed, RngStream, StreamId};
use crate::{Error, Result};

/// `f(x, y) = g(x) + xᵀBy − (1/2)yᵀMy` where
/// `g(x) = (1/4)‖x‖⁴ − (ρ/2)‖x‖²` is a double well,
/// `M = QΛQᵀ` is positive semidefinite with `rank < dim_y` positive
/// eigenvalues, and the coupling satisfies `range(Bᵀ) ⊆ range(M)` so the
/// maximization is attained despite the flat directions.
///
/// Internally `B = CᵀQᵀ` with a coefficient matrix `C` whose rows beyond
/// `rank` are zero; in eigencoordinates `u = Qᵀy` the dual block separates
/// into `uᵢ(Cx)ᵢ − (λᵢ/2)uᵢ²` per mode, giving exact closed forms:
/// `Φ(x) = g(x) + (1/2)xᵀWx` with `W = CᵀΛ⁺C`, best response
/// `u* = Λ⁺Cx` (minimum-norm), and distance to the argmax subspace
/// `‖Λ⁺Cx − u‖` restricted to the positive modes.
#[derive(Debug, Clone)]
pub struct DegenerateQuadratic {
    dim_x: usize,
    dim_y: usize,
    rank: usize,
    well_depth: f64,
    /// Orthogonal eigenbasis of `M` (columns are eigenvectors).
    q: DenseMat,
    /// Eigenvalues of `M`: positive and descending for the first `rank`
    /// entries, exactly zero afterwards.
    spectrum: Vec<f64>,
    /// `C` (dim_y × dim_x): coupling coefficients in eigencoordinates.
    coupling: DenseMat,
    /// Precomputed `W = CᵀΛ⁺C`.
    w: DenseMat,
}

impl DegenerateQuadratic {
    /// Builds a reproducible instance from a structure seed. The seed fixes
    /// the eigenbasis and the coupling coefficients; two instances with the
    /// same arguments are identical.
    pub fn synthesize(
        dim_x: usize,
        dim_y: usize,
        rank: usize,
        well_depth: f64,
        structure_seed: u64,
    ) -> Result<Self> {
        if dim_x == 0 || dim_y == 0 {
            return Err(Error::Config("dimensions must be positive".into()));
        }
        if rank == 0 || rank >= dim_y {
            return Err(Error::Config(format!(
                "rank must satisfy 1 ≤ rank < dim_y for a degenerate dual block, \
                 got rank = {rank}, dim_y = {dim_y}"
            )));
        }
        if !(well_depth.is_finite() && well_depth > 0.0) {
            return Err(Error::Config(format!(
                "well_depth must be a positive finite number, got {well_depth}"
            )));
        }
        let q = linalg::fixed_orthogonal(dim_y, derive_seed(structure_seed, 0));
        let mut spectrum = vec![0.0; dim_y];
        for (i, s) in spectrum.iter_mut().take(rank).enumerate() {
            *s = if rank == 1 {
                1.0
            } else {
                1.5 - (i as f64) / (rank as f64 - 1.0)
            };
        }
        let mut rng = RngStream::new(derive_seed(structure_seed, 1), StreamId::Data);
        let coupling = DenseMat::from_fn(dim_y, dim_x, |i, _| {
            if i < rank {
                rng.next_range(-0.5, 0.5)
            } else {
                0.0
            }
        });
        let mut w = DenseMat::zeros(dim_x, dim_x);
        for i in 0..rank {
            for a in 0..dim_x {
                for b in 0..dim_x {
                    let inc = coupling.get(i, a) * coupling.get(i, b) / spectrum[i];
                    w.set(a, b, w.get(a, b) + inc);
                }
            }
        }
        Ok(DegenerateQuadratic {
            dim_x,
            dim_y,
            rank,
            well_depth,
            q,
            spectrum,
            coupling,
            w,
        })
    }

    pub fn min_positive_eigenvalue(&self) -> f64 {
        self.spectrum[self.rank - 1]
    }

    /// Dimension of the flat (argmax) subspace.
    pub fn nullity(&self) -> usize {
        self.dim_y - self.rank
    }

    /// Per-block Lipschitz constant valid for `‖x‖∞ ≤ box_x` (the `y`-side
    /// terms are globally quadratic, so only the well needs the box).
    pub fn smoothness_on_box(&self, box_x: f64) -> f64 {
        let rx_sq = box_x * box_x * self.dim_x as f64;
        let well = 3.0 * rx_sq + self.well_depth;
        let cross = self.coupling.frobenius();
        well.max(cross).max(self.spectrum[0])
    }

    fn well_value(&self, x: &[f64]) -> f64 {
        let n2 = linalg::norm_sq(x);
        0.25 * n2 * n2 - 0.5 * self.well_depth * n2
    }

    /// `(Cx, Qᵀy)`: the coupled image and the eigencoordinates of `y`.
    fn eigen_parts(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (self.coupling.matvec(x), self.q.tmatvec(y))
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let (cx, u) = self.eigen_parts(x, y);
        let mut v = self.well_value(x) + linalg::dot(&cx, &u);
        for i in 0..self.rank {
            v -= 0.5 * self.spectrum[i] * u[i] * u[i];
        }
        v
    }

    pub fn grad(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (cx, u) = self.eigen_parts(x, y);
        // ∇ₓ = (‖x‖² − ρ)x + Cᵀu.
        let scale = linalg::norm_sq(x) - self.well_depth;
        let mut gx = self.coupling.tmatvec(&u);
        linalg::axpy(scale, x, &mut gx);
        // ∇_y = Q(Cx − Λu).
        let mut modes = cx;
        for i in 0..self.dim_y {
            modes[i] -= self.spectrum[i] * u[i];
        }
        let gy = self.q.matvec(&modes);
        (gx, gy)
    }

    /// Minimum-norm best response `y* = QΛ⁺Cx`.
    pub fn y_star(&self, x: &[f64]) -> Vec<f64> {
        let mut modes = self.coupling.matvec(x);
        for (i, m) in modes.iter_mut().enumerate() {
            *m = if i < self.rank { *m / self.spectrum[i] } else { 0.0 };
        }
        self.q.matvec(&modes)
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        let cx = self.coupling.matvec(x);
        let mut v = self.well_value(x);
        for i in 0..self.rank {
            v += 0.5 * cx[i] * cx[i] / self.spectrum[i];
        }
        v
    }

    pub fn grad_phi(&self, x: &[f64]) -> Vec<f64> {
        let scale = linalg::norm_sq(x) - self.well_depth;
        let mut g = self.w.matvec(x);
        linalg::axpy(scale, x, &mut g);
        g
    }

    /// Euclidean distance from `y` to the argmax subspace of `f(x, ·)`
    /// (flat modes contribute nothing).
    pub fn dist_to_argmax(&self, x: &[f64], y: &[f64]) -> f64 {
        let (cx, u) = self.eigen_parts(x, y);
        let mut d2 = 0.0;
        for i in 0..self.rank {
            let gap = cx[i] / self.spectrum[i] - u[i];
            d2 += gap * gap;
        }
        d2.sqrt()
    }

    /// A unit vector spanning one flat direction of the dual block
    /// (an eigenvector of `M` with eigenvalue zero).
    pub fn flat_direction(&self, j: usize) -> Vec<f64> {
        assert!(j < self.nullity(), "flat index out of range");
        let mut e = vec![0.0; self.dim_y];
        e[self.rank + j] = 1.0;
        self.q.matvec(&e)
    }
}
