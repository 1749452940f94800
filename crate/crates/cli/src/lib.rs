//! Sweeps, self-checks and CSV output for the `geophase` binary.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod format;
pub mod selfcheck;
pub mod sweep;

pub use config::{ConfigError, Experiment, RunConfig, SweepVar};
pub use error::CliError;
