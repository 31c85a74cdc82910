//! Run manifest written next to every set of artifacts.

use serde::Serialize;

/// Everything needed to repeat a run.
///
/// `timings` is the only field that differs between repeated runs.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    /// Program name.
    pub tool: &'static str,
    /// Program version.
    pub version: &'static str,
    /// Subcommand.
    pub command: String,
    /// Arguments after expanding any configuration file; rerunning with them repeats the run.
    pub argv: Vec<String>,
    /// Parsed configuration, defaults included.
    pub config: serde_json::Value,
    /// Seed of a randomized experiment.
    pub seed: Option<u64>,
    /// Worker cap.
    pub threads: Option<usize>,
    /// Files written, relative to the output directory.
    pub artifacts: Vec<String>,
    /// Wall-clock timings.
    pub timings: Timings,
}

/// Wall-clock timings of a run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timings {
    /// Seconds spent in the experiment.
    pub compute_seconds: f64,
    /// Seconds spent writing artifacts.
    pub write_seconds: f64,
}
