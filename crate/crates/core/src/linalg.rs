//! Minimal dense vector and matrix helpers.
//!
//! The built-in problems only need dot products, norms, scaled updates, and
//! matrix-vector products against small fixed matrices, so this module stays
//! deliberately tiny instead of pulling in a linear-algebra crate.

/// Dot product. Panics on length mismatch (internal misuse, not user input).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared Euclidean norm.
pub fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// Squared distance between two vectors.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Euclidean distance between two vectors.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `a - b` as a new vector.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// True if every entry is finite and within `limit` in magnitude.
pub fn within_limit(a: &[f64], limit: f64) -> bool {
    a.iter().all(|x| x.is_finite() && x.abs() <= limit)
}

/// Small dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// `M v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| dot(&self.data[i * self.cols..(i + 1) * self.cols], v))
            .collect()
    }

    /// `Mᵀ v`.
    pub fn tmatvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            axpy(v[i], row, &mut out);
        }
        out
    }

    /// Frobenius norm (upper bound on the spectral norm).
    pub fn frobenius(&self) -> f64 {
        norm(&self.data)
    }
}

/// Apply the Householder reflection `H = I - 2uuᵀ` (u unit) to `v` in place.
fn reflect(u: &[f64], v: &mut [f64]) {
    let s = 2.0 * dot(u, v);
    axpy(-s, u, v);
}

/// A fixed, deterministic orthogonal matrix of size `dim`, built as a product
/// of two Householder reflections with pseudorandom unit vectors.
///
/// Used to rotate diagonal spectra into dense symmetric matrices so that test
/// problems are not accidentally axis-aligned.
pub fn fixed_orthogonal(dim: usize, seed: u64) -> DenseMat {
    use crate::rng::{RngStream, StreamId};
    let mut rng = RngStream::new(seed, StreamId::Data);
    let mut us = Vec::new();
    for _ in 0..2 {
        let mut u: Vec<f64> = (0..dim).map(|_| rng.next_gaussian()).collect();
        let n = norm(&u);
        if n > 1e-12 {
            u.iter_mut().for_each(|x| *x /= n);
            us.push(u);
        }
    }
    // Columns of Q are the reflections applied to the canonical basis.
    let mut q = DenseMat::zeros(dim, dim);
    for j in 0..dim {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        for u in &us {
            reflect(u, &mut e);
        }
        for i in 0..dim {
            q.set(i, j, e[i]);
        }
    }
    q
}
