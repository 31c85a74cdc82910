//! Experiment runner for shift-periodic maps: configuration, parallel Monte
//! Carlo, CSV and JSON artifacts and the `shiftwalk` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod manifest;
pub mod parallel;

pub use error::{RunError, RunResult};
