//! Scenario runner for the `mildns` solver.
//!
//! Scenarios are JSON manifests naming initial data, a grid, solver settings
//! and diagnostics. The `mildns` binary runs them, sweeps a parameter across
//! a template, executes the built-in verification suites and analyzes stored
//! trajectories.

pub mod commands;
pub mod error;
pub mod scenario;

pub use error::{CliError, CliResult};
pub use scenario::{Diagnostic, Scenario, OUT_ROOT_VAR};
