//! Benchmark library for stochastic minimax solvers on nonconvex
//! saddle problems whose inner maximization satisfies a Polyak-Łojasiewicz
//! (PL) inequality.
//!
//! The crate provides:
//!
//! - [`problems`]: the minimax problem abstraction ([`MinimaxProblem`],
//!   [`Point`]) and four built-in test objectives with analytic gradients,
//!   stochastic oracles, and closed-form ground truth where available.
//! - [`solvers`]: single-loop alternating and simultaneous gradient
//!   descent-ascent steps (plain, smoothed with a proximal center, Adam and
//!   RMSprop baselines), a plain gradient-ascent inner loop, a proximal-point
//!   outer loop with warm-started inner solves ([`solvers::catalyst_agda_run`]),
//!   and stepsize constructors derived from the solvers' convergence analyses.
//! - [`metrics`]: stationarity measures for both the joint objective and the
//!   primal function Φ(x) = max_y f(x,y), the Moreau-envelope gradient,
//!   primal-dual gap bounds, and the potential functions that certify descent.
//! - [`convert`]: translation procedures between the two stationarity
//!   notions, with oracle-call accounting and certificates.
//! - [`harness`]: config-file driven experiment runner with seeded,
//!   byte-reproducible CSV traces, grid sweeps, SVG plotting, and shipped
//!   presets.
//!
//! Randomness is fully deterministic and flows through named counter-based
//! streams ([`rng::RngStream`]); identical configs and seeds produce
//! byte-identical trace files.

pub mod convert;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod problems;
pub mod rng;
pub mod solvers;

pub use problems::{MinimaxProblem, Point};
pub use solvers::{SolverState, StepSizes};

/// Crate-wide error type.
///
/// The CLI maps variants to exit codes: configuration errors exit 2, numeric
/// failures (divergence, non-convergence, failed estimation) exit 3.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Invalid configuration: bad parameters, dimension mismatches, missing
    /// capabilities requested by a config.
    #[error("configuration error: {0}")]
    Config(String),

    /// A computation produced a non-finite value outside an iterate update.
    #[error("numeric failure in {context}: {detail}")]
    Numeric { context: String, detail: String },

    /// An iterate left the finite range (coordinate above 1e10 in magnitude
    /// or non-finite). Carries the last finite point.
    #[error("divergence at iteration {iter}: {detail}")]
    Diverged {
        iter: u64,
        detail: String,
        last: Point,
    },

    /// A requested closed-form helper is not available for this problem;
    /// callers should fall back to numerical estimation.
    #[error("closed form `{which}` unavailable for problem `{problem}`")]
    ClosedFormUnavailable {
        which: &'static str,
        problem: &'static str,
    },

    /// An iterative estimation or inner solve exhausted its budget.
    #[error("did not converge within {budget} iterations: {context}")]
    NonConvergence { context: String, budget: u64 },

    /// I/O failure (message-only so the error type stays `Clone`).
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Iterate magnitude beyond which a run is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e10;

/// Default iteration budget for inner estimation loops (metric estimation).
pub const ESTIMATION_BUDGET: u64 = 100_000;

/// Default iteration budget for proximal-point inner solves.
pub const INNER_SOLVE_BUDGET: u64 = 1_000_000;
