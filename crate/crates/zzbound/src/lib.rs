//! Config-driven front end for the bound library: single runs, parameter
//! sweeps and regeneration of the reference tables as CSV.

pub mod config;
pub mod failure;
pub mod format;
pub mod repro;
pub mod run;
pub mod selftest;

pub use config::{parse, BoundFamily, Experiment, ExperimentConfig};
pub use failure::{CliError, FailureKind};
pub use run::{evaluate, run, RunOptions, Row};

/// Caps the global worker pool from `ZZBOUND_THREADS`, if set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("ZZBOUND_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config(format!("ZZBOUND_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::runtime(e.to_string()))
}
