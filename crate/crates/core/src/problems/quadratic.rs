//! Scalar quadratic saddle objectives with complete closed forms.
//!
//! [`QuadraticSaddle`] is the homogeneous benchmark instance
//! `f(x,y) = (a/2)x² + b·x·y − (c/2)y²`. Internally it is stored as the
//! affine family [`AffineQuadratic`], which is closed under anchoring
//! (adding `(p/2)(x − x̄)²`), so every auxiliary objective built by the
//! proximal-point machinery keeps exact saddle points, primal/dual
//! functions, gaps, and Moreau envelopes.

use crate::{Error, Result};

/// Coefficients of the homogeneous scalar saddle
/// `f(x,y) = (a/2)x² + b·x·y − (c/2)y²` with `c > 0`.
///
/// Closed forms: `y*(x) = (b/c)x`, `Φ(x) = (a/2 + b²/(2c))x²`; the declared
/// smoothness constant is `max(|a|,|b|,|c|)` (per-block, sum-of-norms form)
/// and the PL constant in y is `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticSaddle {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticSaddle {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Config("quadratic saddle coefficients must be finite".into()));
        }
        if c <= 0.0 {
            return Err(Error::Config(format!(
                "quadratic saddle needs c > 0 for concavity in y, got c = {c}"
            )));
        }
        if a == 0.0 && b == 0.0 {
            return Err(Error::Config("quadratic saddle needs a ≠ 0 or b ≠ 0".into()));
        }
        Ok(QuadraticSaddle { a, b, c })
    }

    /// Declared smoothness constant `max(|a|,|b|,|c|)`.
    pub fn smoothness(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }
}

/// The affine scalar quadratic family
/// `f(x,y) = (a/2)x² + b·x·y − (c/2)y² + d·x + e·y + f0`, `c > 0`.
///
/// Derived quantities (all exact):
/// - `y*(x) = (b·x + e)/c`
/// - `Φ(x) = Q·x² + R·x + S` with `Q = a/2 + b²/(2c)`, `R = d + b·e/c`,
///   `S = f0 + e²/(2c)`
/// - for `a > 0`: `x*(y) = −(b·y + d)/a` and
///   `Ψ(y) = −(b²/(2a) + c/2)y² + (e − b·d/a)y + (f0 − d²/(2a))`
/// - anchoring maps `(a, d, f0) → (a + p, d − p·x̄, f0 + (p/2)x̄²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineQuadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f0: f64,
}

impl AffineQuadratic {
    pub fn homogeneous(q: QuadraticSaddle) -> Self {
        AffineQuadratic {
            a: q.a,
            b: q.b,
            c: q.c,
            d: 0.0,
            e: 0.0,
            f0: 0.0,
        }
    }

    /// This objective plus `(p/2)(x − anchor)²`.
    pub fn anchored(&self, anchor: f64, p: f64) -> Self {
        AffineQuadratic {
            a: self.a + p,
            b: self.b,
            c: self.c,
            d: self.d - p * anchor,
            e: self.e,
            f0: self.f0 + 0.5 * p * anchor * anchor,
        }
    }

    /// Per-block smoothness constant `max(|a|,|b|,|c|)`.
    pub fn smoothness(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        0.5 * self.a * x * x + self.b * x * y - 0.5 * self.c * y * y
            + self.d * x
            + self.e * y
            + self.f0
    }

    pub fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.a * x + self.b * y + self.d,
            self.b * x - self.c * y + self.e,
        )
    }

    pub fn y_star(&self, x: f64) -> f64 {
        (self.b * x + self.e) / self.c
    }

    /// Leading coefficient of `Φ`.
    pub fn phi_q(&self) -> f64 {
        0.5 * self.a + 0.5 * self.b * self.b / self.c
    }

    /// Linear coefficient of `Φ`.
    pub fn phi_r(&self) -> f64 {
        self.d + self.b * self.e / self.c
    }

    /// Constant coefficient of `Φ`.
    pub fn phi_s(&self) -> f64 {
        self.f0 + 0.5 * self.e * self.e / self.c
    }

    pub fn phi(&self, x: f64) -> f64 {
        (self.phi_q() * x + self.phi_r()) * x + self.phi_s()
    }

    pub fn grad_phi(&self, x: f64) -> f64 {
        2.0 * self.phi_q() * x + self.phi_r()
    }

    /// Minimizer of Φ; requires `Q > 0`.
    pub fn x_opt(&self) -> Result<f64> {
        let q = self.phi_q();
        if q <= 0.0 {
            return Err(Error::Numeric {
                context: "quadratic Φ minimizer".into(),
                detail: format!("Φ has leading coefficient {q} ≤ 0, unbounded below"),
            });
        }
        Ok(-self.phi_r() / (2.0 * q))
    }

    pub fn phi_star(&self) -> Result<f64> {
        Ok(self.phi(self.x_opt()?))
    }

    /// Minimizer in x for fixed y; requires `a > 0`.
    pub fn x_star(&self, y: f64) -> Result<f64> {
        if self.a <= 0.0 {
            return Err(Error::Numeric {
                context: "quadratic dual".into(),
                detail: format!("objective is not strongly convex in x (a = {})", self.a),
            });
        }
        Ok(-(self.b * y + self.d) / self.a)
    }

    /// Dual function `Ψ(y) = min_x f(x,y)`; requires `a > 0`.
    pub fn psi(&self, y: f64) -> Result<f64> {
        let x = self.x_star(y)?;
        Ok(self.value(x, y))
    }

    /// Maximizer of Ψ; requires `a > 0`.
    pub fn y_opt(&self) -> Result<f64> {
        if self.a <= 0.0 {
            return Err(Error::Numeric {
                context: "quadratic dual".into(),
                detail: format!("objective is not strongly convex in x (a = {})", self.a),
            });
        }
        Ok((self.a * self.e - self.b * self.d) / (self.a * self.c + self.b * self.b))
    }

    pub fn psi_star(&self) -> Result<f64> {
        let y = self.y_opt()?;
        self.psi(y)
    }

    /// Saddle point (argmin of Φ paired with its maximizer).
    pub fn saddle(&self) -> Result<(f64, f64)> {
        let x = self.x_opt()?;
        Ok((x, self.y_star(x)))
    }

    /// Primal-dual gap `Φ(x) − Ψ(y)`; requires `a > 0`.
    pub fn gap(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.phi(x) - self.psi(y)?)
    }

    /// Proximal point of Φ: `argmin_z Φ(z) + (z−x)²/(2λ)`.
    /// Requires `1 + 2λQ > 0` so the subproblem is strongly convex.
    pub fn prox_phi(&self, x: f64, lambda: f64) -> Result<f64> {
        if lambda <= 0.0 {
            return Err(Error::Config(format!("prox parameter λ must be positive, got {lambda}")));
        }
        let denom = 1.0 + 2.0 * lambda * self.phi_q();
        if denom <= 0.0 {
            return Err(Error::Numeric {
                context: "quadratic Moreau envelope".into(),
                detail: format!("1 + 2λQ = {denom} ≤ 0: envelope undefined at λ = {lambda}"),
            });
        }
        Ok((x - lambda * self.phi_r()) / denom)
    }

    /// Moreau envelope `Φ_λ(x) = min_z Φ(z) + (z−x)²/(2λ)`.
    pub fn moreau_phi(&self, x: f64, lambda: f64) -> Result<f64> {
        let z = self.prox_phi(x, lambda)?;
        Ok(self.phi(z) + (z - x) * (z - x) / (2.0 * lambda))
    }
}
