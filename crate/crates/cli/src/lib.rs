//! Configuration-driven front end for the microcavity simulator.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod units;

pub use config::ScenarioConfig;
pub use error::CliError;
