//! Config-driven runner for the SGQT benchmark experiments.
//!
//! Subcommands: `run <config>`, `compare <dirA> <dirB>` and
//! `list-experiments`. `SGQT_WORKERS` caps the number of worker threads.

pub mod compare;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use sgqt_core::bench::{run_experiment, ExperimentKind};

pub use config::{OutputFormat, RunConfig};

pub const WORKERS_ENV: &str = "SGQT_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Schema(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

/// Caps the global thread pool from `SGQT_WORKERS`, if set.
pub fn configure_workers() -> Result<(), CliError> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Schema(format!(
                "{WORKERS_ENV} must be a positive integer (got {value:?})"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("cannot start {n} workers: {e}")))
}

/// Runs the experiment of the config at `path`; returns the output directory.
pub fn cmd_run(path: &Path, output_override: Option<&Path>) -> Result<PathBuf, CliError> {
    let config = RunConfig::load(path)?;
    let spec = config.experiment_spec()?;
    let result = run_experiment(&spec).map_err(|e| CliError::Runtime(e.to_string()))?;
    let dir = output_override.map_or_else(|| config.output_dir.clone(), Path::to_path_buf);
    output::write_run(&dir, &config, &result)?;
    Ok(dir)
}

pub fn cmd_compare(a: &Path, b: &Path) -> Result<String, CliError> {
    let sa = output::SummaryFile::load(a)?;
    let sb = output::SummaryFile::load(b)?;
    let rows = compare::compare(&sa, &sb)?;
    Ok(format!(
        "A: {} ({})\nB: {} ({})\n{}",
        a.display(),
        sa.experiment,
        b.display(),
        sb.experiment,
        compare::format_table(&rows)
    ))
}

pub fn cmd_list_experiments() -> String {
    let mut out = String::new();
    for kind in ExperimentKind::ALL {
        out.push_str(&format!(
            "{:<24} {} qubit(s)  {}\n",
            kind.name(),
            kind.n_qubits(),
            kind.description()
        ));
    }
    out
}
