//! Verification harness and experiment runner for `pathsplit-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod parallel;
pub mod record;
pub mod report;
pub mod runner;
pub mod suites;
pub mod verify;

pub use error::{RunError, RunResult};
