//! Experiment harness for the `ngmres` solver library.
//!
//! The library side of the `ngmres-lab` binary: flat `key=value`
//! experiment configs, deterministic CSV/JSON/SVG artifacts, a replay
//! checker that re-runs the diagnostics against stored traces, and the
//! acceptance scoreboard.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod runner;
pub mod svg;
pub mod trace_io;

pub use config::{ConfigOverlay, ExperimentConfig, PreconditionSpec, ProblemSpec, SolverSpec, X0Spec};
pub use error::{Error, Result};
pub use runner::{check_dir, run, RunArtifact};
