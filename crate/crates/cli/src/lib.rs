//! Scenario-driven batch runner over the relational Gaussian-state core.
//!
//! The library surface exists so integration tests can drive the exact
//! code paths of the `qrf` binary.

pub mod demos;
pub mod report;
pub mod runner;
pub mod scenario;

pub use runner::{run_parsed, run_scenario, RunError, RunOutcome};
pub use scenario::{validate_file, Diagnostic, Scenario};
