//! Benchmark harness for the ecqp solvers: seeded problem sweeps, solver
//! comparisons, worst-case and spectral diagnostics, with CSV and SVG output.

pub mod config;
pub mod experiments;
pub mod solvers;
pub mod stats;
pub mod svg;

pub use config::{ExperimentConfig, SolverKind};
