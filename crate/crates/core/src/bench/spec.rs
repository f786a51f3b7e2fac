use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::measure::{
    bell_state, AccountingMode, BellSourceModel, ErrorRedraw, WaveplateErrorModel,
};
use crate::qcore::{BlochVector, PureState};
use crate::sgqt::{GainSchedule, PartialFidelityMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed of the three pinned one-qubit target states.
pub const DEFAULT_TARGET_SEED: u64 = 0x5347_5154;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentKind {
    /// One-qubit SGQT against SQT at a few photons per iteration.
    #[serde(rename = "low-count-1q")]
    LowCount1q,
    /// One-qubit SGQT and SQT under increasing waveplate angle error.
    #[serde(rename = "error-sweep-1q")]
    ErrorSweep1q,
    /// Two-qubit convergence for several Pauli subset sizes.
    #[serde(rename = "two-qubit-subset-sweep")]
    TwoQubitSubsetSweep,
    /// Two-qubit SGQT against SQT at a few photons per iteration.
    #[serde(rename = "two-qubit-low-count")]
    TwoQubitLowCount,
    /// Two-qubit SGQT and SQT under increasing waveplate angle error.
    #[serde(rename = "two-qubit-error-sweep")]
    TwoQubitErrorSweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::LowCount1q,
        ExperimentKind::ErrorSweep1q,
        ExperimentKind::TwoQubitSubsetSweep,
        ExperimentKind::TwoQubitLowCount,
        ExperimentKind::TwoQubitErrorSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::LowCount1q => "low-count-1q",
            ExperimentKind::ErrorSweep1q => "error-sweep-1q",
            ExperimentKind::TwoQubitSubsetSweep => "two-qubit-subset-sweep",
            ExperimentKind::TwoQubitLowCount => "two-qubit-low-count",
            ExperimentKind::TwoQubitErrorSweep => "two-qubit-error-sweep",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::LowCount1q => {
                "one qubit, ~7 photons per iteration, SGQT vs matched-budget and fixed-budget SQT"
            }
            ExperimentKind::ErrorSweep1q => {
                "one qubit, Gaussian waveplate errors at several levels, SGQT vs repeated SQT"
            }
            ExperimentKind::TwoQubitSubsetSweep => {
                "Bell state, partial-fidelity SGQT for several Pauli subset sizes"
            }
            ExperimentKind::TwoQubitLowCount => {
                "Bell state, ~7 photons per iteration, SGQT vs matched-budget SQT"
            }
            ExperimentKind::TwoQubitErrorSweep => {
                "Bell state, Gaussian waveplate errors at several levels, SGQT vs repeated SQT"
            }
        }
    }

    pub fn n_qubits(self) -> usize {
        match self {
            ExperimentKind::LowCount1q | ExperimentKind::ErrorSweep1q => 1,
            _ => 2,
        }
    }

    pub fn has_errors(self) -> bool {
        matches!(
            self,
            ExperimentKind::ErrorSweep1q | ExperimentKind::TwoQubitErrorSweep
        )
    }

    pub fn has_matched_budget_sqt(self) -> bool {
        matches!(
            self,
            ExperimentKind::LowCount1q | ExperimentKind::TwoQubitLowCount
        )
    }
}

/// Which true states an experiment estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    /// Haar-random pure states from a seed.
    Haar { count: usize, seed: u64 },
    /// One-qubit pure states given as unit Bloch vectors.
    Bloch { vectors: Vec<[f64; 3]> },
    /// The entangled-pair source at the given plate angle.
    Bell {
        theta_degrees: f64,
        epsilon_degrees: f64,
    },
}

impl TargetSpec {
    pub fn default_for(kind: ExperimentKind) -> Self {
        match kind.n_qubits() {
            1 => TargetSpec::Haar {
                count: 3,
                seed: DEFAULT_TARGET_SEED,
            },
            _ => {
                let s = BellSourceModel::singlet();
                TargetSpec::Bell {
                    theta_degrees: s.theta_degrees,
                    epsilon_degrees: s.epsilon_degrees,
                }
            }
        }
    }

    pub fn states(&self, n_qubits: usize) -> Result<Vec<PureState>> {
        let states = match self {
            TargetSpec::Haar { count, seed } => {
                if *count == 0 {
                    return Err(invalid("targets.count must be ≥ 1"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| PureState::haar_random(n_qubits, &mut rng))
                    .collect()
            }
            TargetSpec::Bloch { vectors } => {
                if n_qubits != 1 {
                    return Err(invalid("Bloch-vector targets are one-qubit only"));
                }
                if vectors.is_empty() {
                    return Err(invalid("targets.vectors must not be empty"));
                }
                vectors
                    .iter()
                    .map(|v| BlochVector::new(v[0], v[1], v[2])?.to_state())
                    .collect::<Result<Vec<_>>>()?
            }
            TargetSpec::Bell {
                theta_degrees,
                epsilon_degrees,
            } => {
                if n_qubits != 2 {
                    return Err(invalid("Bell-source targets are two-qubit only"));
                }
                vec![bell_state(&BellSourceModel {
                    theta_degrees: *theta_degrees,
                    epsilon_degrees: *epsilon_degrees,
                })]
            }
        };
        Ok(states)
    }
}

/// Photon rate of the SGQT arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonSpec {
    /// Poisson mean: per iteration when split, otherwise per measurement.
    pub mean: f64,
    pub accounting: AccountingMode,
}

/// What estimates are scored against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BenchmarkMode {
    /// The exact true state.
    #[default]
    Exact,
    /// A long-integration MLE reconstruction of the true state.
    SimulatedSqt { total_photons: f64 },
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub targets: TargetSpec,
    /// Independent trials per target and condition.
    pub repetitions: usize,
    pub iterations: usize,
    pub gains: GainSchedule,
    /// `None` runs every measurement noiselessly.
    pub photons: Option<PhotonSpec>,
    /// Pauli subset sizes (two-qubit kinds).
    pub subset_sizes: Vec<usize>,
    pub objective_mode: PartialFidelityMode,
    /// Waveplate error levels in degrees (error kinds).
    pub error_levels: Vec<f64>,
    pub error_redraw: ErrorRedraw,
    /// Iterations at which matched-budget SQT arms are run.
    pub checkpoints: Vec<usize>,
    /// Expected total photon budgets of the fixed-budget SQT sweep.
    pub sqt_budgets: Vec<f64>,
    /// Repetitions of the matched-measurement SQT arm; derived from the
    /// iteration count when absent.
    pub sqt_repetitions: Option<usize>,
    pub benchmark: BenchmarkMode,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let split = |mean| {
            Some(PhotonSpec {
                mean,
                accounting: AccountingMode::PerIterationSplit,
            })
        };
        let base = Self {
            kind,
            targets: TargetSpec::default_for(kind),
            repetitions: 10,
            iterations: 40,
            gains: GainSchedule::noisy_single_qubit(),
            photons: split(7.0),
            subset_sizes: Vec::new(),
            objective_mode: PartialFidelityMode::default(),
            error_levels: Vec::new(),
            error_redraw: ErrorRedraw::default(),
            checkpoints: Vec::new(),
            sqt_budgets: Vec::new(),
            sqt_repetitions: None,
            benchmark: BenchmarkMode::Exact,
            seed: 1,
        };
        match kind {
            ExperimentKind::LowCount1q => Self {
                checkpoints: vec![10, 20, 30, 40],
                sqt_budgets: vec![28.0, 56.0, 140.0, 280.0, 560.0, 1400.0, 2800.0],
                ..base
            },
            ExperimentKind::ErrorSweep1q => Self {
                photons: split(5000.0),
                error_levels: WaveplateErrorModel::DEFAULT_LEVELS.to_vec(),
                ..base
            },
            ExperimentKind::TwoQubitSubsetSweep => Self {
                iterations: 100,
                gains: GainSchedule::two_qubit(),
                photons: Some(PhotonSpec {
                    mean: 1000.0,
                    accounting: AccountingMode::PerExpectation,
                }),
                subset_sizes: vec![2, 4, 6, 8],
                ..base
            },
            ExperimentKind::TwoQubitLowCount => Self {
                iterations: 100,
                gains: GainSchedule::two_qubit(),
                subset_sizes: vec![8],
                checkpoints: vec![100],
                ..base
            },
            ExperimentKind::TwoQubitErrorSweep => Self {
                iterations: 100,
                gains: GainSchedule::two_qubit(),
                photons: Some(PhotonSpec {
                    mean: 1000.0,
                    accounting: AccountingMode::PerExpectation,
                }),
                subset_sizes: vec![8],
                error_levels: WaveplateErrorModel::DEFAULT_LEVELS.to_vec(),
                ..base
            },
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.kind.n_qubits()
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(invalid("repetitions must be ≥ 1"));
        }
        if self.iterations == 0 {
            return Err(invalid("iterations must be ≥ 1"));
        }
        self.gains.validate()?;
        self.targets.states(self.n_qubits())?;
        if let Some(p) = self.photons {
            if !(p.mean.is_finite() && p.mean >= 0.0) {
                return Err(invalid(format!("photons.mean {} must be ≥ 0", p.mean)));
            }
        }
        if self.n_qubits() == 2 {
            if self.subset_sizes.is_empty() {
                return Err(invalid(
                    "subset_sizes must not be empty for two-qubit kinds",
                ));
            }
            if let Some(m) = self.subset_sizes.iter().find(|m| !(1..=16).contains(*m)) {
                return Err(invalid(format!("subset size {m} outside [1, 16]")));
            }
        } else if !self.subset_sizes.is_empty() {
            return Err(invalid("subset_sizes applies to two-qubit kinds only"));
        }
        if self.kind.has_errors() {
            WaveplateErrorModel::validate_levels(&self.error_levels)?;
        } else if !self.error_levels.is_empty() {
            return Err(invalid("error_levels applies to error-sweep kinds only"));
        }
        if let Some(k) = self
            .checkpoints
            .iter()
            .find(|&&k| k == 0 || k > self.iterations)
        {
            return Err(invalid(format!(
                "checkpoint {k} outside [1, {}]",
                self.iterations
            )));
        }
        if self.kind.has_matched_budget_sqt()
            && self.photons.is_none()
            && (!self.checkpoints.is_empty() || !self.sqt_budgets.is_empty())
        {
            return Err(invalid("budget-matched SQT needs a photon rate"));
        }
        if let Some(b) = self
            .sqt_budgets
            .iter()
            .find(|b| !(b.is_finite() && **b > 0.0))
        {
            return Err(invalid(format!("SQT budget {b} must be positive")));
        }
        if self.sqt_repetitions == Some(0) {
            return Err(invalid("sqt_repetitions must be ≥ 1"));
        }
        if let BenchmarkMode::SimulatedSqt { total_photons } = self.benchmark {
            if !(total_photons.is_finite() && total_photons > 0.0) {
                return Err(invalid("benchmark.total_photons must be positive"));
            }
        }
        Ok(())
    }

    /// Repetitions of the matched-measurement SQT arm of error sweeps.
    ///
    /// One qubit: `N/4` (ten repetitions of the four projectors at `N = 40`).
    /// Two qubits: `⌈N·|M|/16⌉`, the SGQT Pauli count over the set size.
    pub fn sqt_repetitions_for(&self, subset_size: Option<usize>) -> usize {
        if let Some(r) = self.sqt_repetitions {
            return r;
        }
        match subset_size {
            None => (self.iterations / 4).max(1),
            Some(m) => (self.iterations * m).div_ceil(16).max(1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for kind in ExperimentKind::ALL {
            ExperimentSpec::defaults(kind).validate().unwrap();
        }
    }

    #[test]
    fn default_targets() {
        let one = TargetSpec::default_for(ExperimentKind::LowCount1q)
            .states(1)
            .unwrap();
        assert_eq!(one.len(), 3);
        let two = TargetSpec::default_for(ExperimentKind::TwoQubitLowCount)
            .states(2)
            .unwrap();
        assert_eq!(two.len(), 1);
        let singlet = PureState::new(vec![
            crate::qcore::c(0.0, 0.0),
            crate::qcore::c(1.0, 0.0),
            crate::qcore::c(-1.0, 0.0),
            crate::qcore::c(0.0, 0.0),
        ])
        .unwrap();
        assert!((two[0].fidelity(&singlet).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_catches_mismatches() {
        let mut s = ExperimentSpec::defaults(ExperimentKind::LowCount1q);
        s.subset_sizes = vec![2];
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::defaults(ExperimentKind::TwoQubitSubsetSweep);
        s.subset_sizes = vec![0];
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::defaults(ExperimentKind::ErrorSweep1q);
        s.error_levels = vec![2.0, 1.0];
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::defaults(ExperimentKind::LowCount1q);
        s.checkpoints = vec![41];
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::defaults(ExperimentKind::LowCount1q);
        s.targets = TargetSpec::Bloch {
            vectors: vec![[0.0, 0.0, 0.5]],
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn sqt_repetition_defaults() {
        let s = ExperimentSpec::defaults(ExperimentKind::ErrorSweep1q);
        assert_eq!(s.sqt_repetitions_for(None), 10);
        let s = ExperimentSpec::defaults(ExperimentKind::TwoQubitErrorSweep);
        assert_eq!(s.sqt_repetitions_for(Some(8)), 50);
    }
}
