//! Result files of a run directory.
//!
//! - `trajectories.csv`: one row per SGQT iteration.
//! - `sqt.csv`: one row per SQT reconstruction arm.
//! - `summary.json`: per-condition statistics and provenance.
//! - `config.toml`: the resolved config, sufficient to rerun.
//!
//! CSV files open with `#` comment lines carrying the version, experiment,
//! seed and config hash. Only `summary.json` records a wall-clock timestamp.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sgqt_core::bench::{ConditionSummary, ExperimentResult, ExperimentSpec, MissingCell, SqtArm};

use crate::config::{spec_hash, OutputFormat, RunConfig};
use crate::CliError;

pub const TRAJECTORY_FILE: &str = "trajectories.csv";
pub const SQT_FILE: &str = "sqt.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.toml";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub version: String,
    pub experiment: String,
    pub n_qubits: usize,
    pub dimension: usize,
    pub seed: u64,
    pub config_sha256: String,
    pub generated_unix_seconds: u64,
    pub spec: ExperimentSpec,
    pub no_photon_events: u64,
    pub conditions: Vec<ConditionSummary>,
    pub missing: Vec<MissingCell>,
}

impl SummaryFile {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(SUMMARY_FILE);
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Runtime(format!("corrupt {}: {e}", path.display())))
    }
}

#[derive(Serialize)]
struct SqtRow<'a> {
    experiment: &'a str,
    arm: &'a str,
    condition: &'a str,
    trial: usize,
    iteration: Option<usize>,
    budget: f64,
    photons: u64,
    fidelity: f64,
    repetitions: usize,
    mle_converged: bool,
}

fn arm_name(arm: SqtArm) -> &'static str {
    match arm {
        SqtArm::MatchedBudget => "matched-budget",
        SqtArm::MatchedMeasurements => "matched-measurements",
        SqtArm::FixedBudget => "fixed-budget",
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("cannot write {}: {e}", path.display()))
}

fn provenance_header(spec: &ExperimentSpec, hash: &str) -> String {
    format!(
        "# sgqt {VERSION}\n# experiment: {}\n# seed: {}\n# config-sha256: {hash}\n",
        spec.kind.name(),
        spec.seed
    )
}

fn write_csv<R: Serialize>(path: &Path, header: &str, rows: &[R]) -> Result<(), CliError> {
    let mut file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    file.write_all(header.as_bytes())
        .map_err(|e| io_error(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    for row in rows {
        writer.serialize(row).map_err(|e| io_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))
}

/// Writes every requested file of `result` into `dir`.
pub fn write_run(
    dir: &Path,
    config: &RunConfig,
    result: &ExperimentResult,
) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let spec = &result.spec;
    let hash = spec_hash(spec);
    let header = provenance_header(spec, &hash);
    let experiment = spec.kind.name();

    if config.formats.contains(&OutputFormat::Csv) {
        write_csv(
            &dir.join(TRAJECTORY_FILE),
            &header,
            &result.trajectory_rows(),
        )?;
        let sqt: Vec<SqtRow> = result
            .sqt
            .iter()
            .map(|s| SqtRow {
                experiment,
                arm: arm_name(s.arm),
                condition: &s.condition,
                trial: result.global_trial(s.target, s.trial),
                iteration: s.iteration,
                budget: s.budget,
                photons: s.photons,
                fidelity: s.fidelity,
                repetitions: s.repetitions,
                mle_converged: s.mle_converged,
            })
            .collect();
        write_csv(&dir.join(SQT_FILE), &header, &sqt)?;
    }
    if config.formats.contains(&OutputFormat::Json) {
        let summary = SummaryFile {
            version: VERSION.to_string(),
            experiment: experiment.to_string(),
            n_qubits: spec.n_qubits(),
            dimension: 1 << spec.n_qubits(),
            seed: spec.seed,
            config_sha256: hash,
            generated_unix_seconds: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            spec: spec.clone(),
            no_photon_events: result.sgqt.iter().map(|t| t.run.no_photon_events).sum(),
            conditions: result.summary.clone(),
            missing: result.missing.clone(),
        };
        let path = dir.join(SUMMARY_FILE);
        let text = serde_json::to_string_pretty(&summary).map_err(|e| io_error(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
    }
    let path = dir.join(CONFIG_FILE);
    fs::write(&path, config.to_toml()).map_err(|e| io_error(&path, e))
}
