//! Experiment harness: declarative TOML configs resolved into seeded,
//! reproducible runs; CSV traces with provenance headers; stepsize grid
//! sweeps with per-cell aggregates; self-contained SVG figures; and a
//! table of named presets for the reference experiments.
//!
//! The layering is strict: this module drives the solver and metric APIs
//! but adds no mathematics of its own, and nothing here feeds back into
//! solver state — a trajectory depends only on problem, solver, stepsizes,
//! and seed.

pub mod config;
pub mod plot;
pub mod presets;
pub mod run;
pub mod sweep;
pub mod trace;

pub use config::{
    MetricId, ProblemConfig, RunConfig, SolverConfig, StepSizeConfig, SweepConfig,
    ThresholdConfig,
};
pub use plot::{PlotSpec, render_to_file};
pub use presets::{Preset, PresetKind};
pub use run::{run_config, RunOutcome};
pub use sweep::{run_sweep, SweepOutcome};
pub use trace::{read_trace, write_trace, Trace, TraceRow};
