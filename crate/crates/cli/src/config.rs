//! Run configuration files.
//!
//! A config is a TOML document. `kind` picks the experiment and its defaults;
//! the optional `[experiment]` table overrides individual fields:
//!
//! ```toml
//! kind = "low-count-1q"          # see `sgqt list-experiments`
//! seed = 7                       # master seed of every random stream
//! output_dir = "runs/low-count"  # created if missing
//! formats = ["csv", "json"]      # trajectory/SQT CSVs and summary JSON
//!
//! [experiment]
//! repetitions = 50
//! iterations = 40
//! noiseless = false              # true drops photon noise entirely
//! subset_sizes = [2, 4]          # two-qubit kinds
//! objective_mode = "shared-reweighted"   # or "literal"
//! error_levels = [1.0, 8.0]      # degrees, error-sweep kinds
//! error_redraw = "per-measurement"       # or "per-run"
//! checkpoints = [10, 40]         # matched-budget SQT iterations
//! sqt_budgets = [280.0, 2800.0]  # fixed-budget SQT sweep
//! sqt_repetitions = 10           # matched-measurement SQT repeats
//!
//! [experiment.photons]
//! mean = 7.0
//! accounting = "per-iteration-split"     # or "per-expectation"
//!
//! [experiment.gains]
//! a = 0.5
//! b = 0.5
//! big_a = 0.0
//! s = 0.602
//! t = 0.101
//!
//! [experiment.targets]
//! kind = "haar"                  # or "bloch" / "bell"
//! count = 3
//! seed = 1397182804
//!
//! [experiment.benchmark]
//! kind = "exact"                 # or "simulated-sqt" with total_photons
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sgqt_core::bench::{BenchmarkMode, ExperimentKind, ExperimentSpec, PhotonSpec, TargetSpec};
use sgqt_core::measure::ErrorRedraw;
use sgqt_core::sgqt::{GainSchedule, PartialFidelityMode};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

/// Field-by-field overrides of the per-kind experiment defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noiseless: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset_sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective_mode: Option<PartialFidelityMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_levels: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_redraw: Option<ErrorRedraw>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sqt_budgets: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sqt_repetitions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photons: Option<PhotonSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gains: Option<GainSchedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<BenchmarkMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    #[serde(default)]
    pub experiment: ExperimentOverrides,
}

fn default_seed() -> u64 {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

impl RunConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            seed: default_seed(),
            output_dir: default_output_dir(),
            formats: default_formats(),
            experiment: ExperimentOverrides::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// The resolved, validated experiment.
    pub fn experiment_spec(&self) -> Result<ExperimentSpec, CliError> {
        let o = &self.experiment;
        let mut s = ExperimentSpec::defaults(self.kind);
        s.seed = self.seed;
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = &o.$f { s.$f = v.clone(); })*};
        }
        set!(
            repetitions,
            iterations,
            subset_sizes,
            objective_mode,
            error_levels,
            error_redraw
        );
        set!(checkpoints, sqt_budgets, gains, targets, benchmark);
        if o.sqt_repetitions.is_some() {
            s.sqt_repetitions = o.sqt_repetitions;
        }
        if o.photons.is_some() {
            s.photons = o.photons;
        }
        if o.noiseless == Some(true) {
            if o.photons.is_some() {
                return Err(CliError::Schema(
                    "experiment.noiseless conflicts with experiment.photons".into(),
                ));
            }
            s.photons = None;
            if o.checkpoints.is_none() {
                s.checkpoints.clear();
            }
            if o.sqt_budgets.is_none() {
                s.sqt_budgets.clear();
            }
        }
        s.validate()
            .map_err(|e| CliError::Schema(format!("experiment: {e}")))?;
        Ok(s)
    }
}

/// SHA-256 of the resolved experiment, hex encoded.
pub fn spec_hash(spec: &ExperimentSpec) -> String {
    let canonical = serde_json::to_vec(spec).expect("spec serializes to JSON");
    hex::encode(Sha256::digest(canonical))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = RunConfig::new(ExperimentKind::TwoQubitErrorSweep);
        c.seed = 99;
        c.experiment.repetitions = Some(5);
        c.experiment.error_levels = Some(vec![0.5, 8.0]);
        c.experiment.targets = Some(TargetSpec::Bell {
            theta_degrees: 40.0,
            epsilon_degrees: 0.0,
        });
        c.experiment.benchmark = Some(BenchmarkMode::SimulatedSqt { total_photons: 1e6 });
        c.experiment.gains = Some(GainSchedule::asymptotic());
        let text = c.to_toml();
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
        let minimal = RunConfig::new(ExperimentKind::LowCount1q);
        assert_eq!(RunConfig::parse(&minimal.to_toml()).unwrap(), minimal);
    }

    #[test]
    fn unknown_field_is_named() {
        let err = RunConfig::parse("kind = \"low-count-1q\"\n[experiment]\nrepetitons = 3\n")
            .unwrap_err();
        assert!(
            matches!(&err, CliError::Schema(m) if m.contains("repetitons")),
            "{err}"
        );
        let err = RunConfig::parse("kind = \"low-count-1q\"\n[experiment]\niterations = -3\n")
            .unwrap_err();
        assert!(
            matches!(&err, CliError::Schema(m) if m.contains("iterations")),
            "{err}"
        );
    }

    #[test]
    fn overrides_apply() {
        let c = RunConfig::parse(
            "kind = \"error-sweep-1q\"\nseed = 4\n[experiment]\nerror_levels = [8.0]\nrepetitions = 50\n",
        )
        .unwrap();
        let s = c.experiment_spec().unwrap();
        assert_eq!(s.seed, 4);
        assert_eq!(s.error_levels, vec![8.0]);
        assert_eq!(s.repetitions, 50);
        assert_eq!(s.iterations, 40);
    }

    #[test]
    fn noiseless_drops_budget_arms() {
        let c =
            RunConfig::parse("kind = \"low-count-1q\"\n[experiment]\nnoiseless = true\n").unwrap();
        let s = c.experiment_spec().unwrap();
        assert!(s.photons.is_none() && s.checkpoints.is_empty() && s.sqt_budgets.is_empty());
    }

    #[test]
    fn invalid_values_are_schema_errors() {
        let c = RunConfig::parse("kind = \"low-count-1q\"\n[experiment]\ncheckpoints = [80]\n")
            .unwrap();
        assert!(matches!(c.experiment_spec(), Err(CliError::Schema(_))));
    }

    #[test]
    fn hash_tracks_the_spec() {
        let a = RunConfig::new(ExperimentKind::LowCount1q)
            .experiment_spec()
            .unwrap();
        let mut b = a.clone();
        assert_eq!(spec_hash(&a), spec_hash(&b));
        b.seed += 1;
        assert_ne!(spec_hash(&a), spec_hash(&b));
        assert_eq!(spec_hash(&a).len(), 64);
    }
}
