use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::MeasurementBackend;
use crate::qcore::{c, PauliOp, PureState};

/// Relative singular-value cutoff for the rank test.
const RANK_TOLERANCE: f64 = 1e-10;

/// An ordered, informationally complete list of measured projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographySet {
    projectors: Vec<PureState>,
    design: DMatrix<f64>,
}

impl TomographySet {
    /// Validates that `projectors` determine every state of their dimension.
    pub fn new(projectors: Vec<PureState>) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| invalid("tomography set must not be empty"))?;
        let dim = first.dim();
        if let Some(p) = projectors.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: p.dim(),
            });
        }
        let design = design_matrix(&projectors)?;
        let required = dim * dim;
        let rank = numerical_rank(&design);
        if rank < required {
            return Err(Error::InvalidSet { rank, required });
        }
        Ok(Self { projectors, design })
    }

    /// `{H, V, D, R}` on each qubit; for two qubits all 16 ordered pairs,
    /// first qubit outermost.
    pub fn standard(n_qubits: usize) -> Result<Self> {
        let single = vec![
            PureState::new(vec![c(1.0, 0.0), c(0.0, 0.0)])?,
            PureState::new(vec![c(0.0, 0.0), c(1.0, 0.0)])?,
            PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)])?,
            PureState::new(vec![c(1.0, 0.0), c(0.0, 1.0)])?,
        ];
        let projectors = match n_qubits {
            1 => single,
            2 => single
                .iter()
                .flat_map(|a| single.iter().map(move |b| a.tensor(b)))
                .collect(),
            n => {
                return Err(invalid(format!(
                    "standard set defined for 1 or 2 qubits, not {n}"
                )))
            }
        };
        Self::new(projectors)
    }

    pub fn projectors(&self) -> &[PureState] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn n_qubits(&self) -> usize {
        self.projectors[0].n_qubits()
    }

    /// Rows are projectors, columns Pauli indices: `⟨ψ_i|P_j|ψ_i⟩ / d`.
    pub(crate) fn design(&self) -> &DMatrix<f64> {
        &self.design
    }
}

fn design_matrix(projectors: &[PureState]) -> Result<DMatrix<f64>> {
    let n = projectors[0].n_qubits();
    let d = projectors[0].dim() as f64;
    let paulis = PauliOp::all(n);
    let mut a = DMatrix::zeros(projectors.len(), paulis.len());
    for (i, psi) in projectors.iter().enumerate() {
        for (j, op) in paulis.iter().enumerate() {
            a[(i, j)] = psi.expectation_of(&op.matrix())?.re / d;
        }
    }
    Ok(a)
}

fn numerical_rank(a: &DMatrix<f64>) -> usize {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * max).count()
}

/// Recorded outcome of one projector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountEntry {
    pub successes: u64,
    pub trials: u64,
    /// Observed frequency; the exact probability for noiseless backends.
    pub frequency: f64,
    pub exact: bool,
}

impl CountEntry {
    pub fn counted(successes: u64, trials: u64) -> Result<Self> {
        if successes > trials {
            return Err(invalid(format!(
                "{successes} successes exceed {trials} trials"
            )));
        }
        Ok(Self {
            successes,
            trials,
            frequency: if trials == 0 {
                0.5
            } else {
                successes as f64 / trials as f64
            },
            exact: false,
        })
    }

    pub fn exact(probability: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(invalid(format!("probability {probability} outside [0, 1]")));
        }
        Ok(Self {
            successes: 0,
            trials: 0,
            frequency: probability,
            exact: true,
        })
    }

    /// Likelihood weight: the photon count, or one for exact entries.
    pub fn weight(&self) -> f64 {
        if self.exact {
            1.0
        } else {
            self.trials as f64
        }
    }
}

/// One entry per projector of a [`TomographySet`], in set order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountVector {
    pub entries: Vec<CountEntry>,
}

impl CountVector {
    pub fn photons(&self) -> u64 {
        self.entries.iter().map(|e| e.trials).sum()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.frequency).collect()
    }

    pub(crate) fn check_len(&self, set: &TomographySet) -> Result<()> {
        if self.entries.len() != set.len() {
            return Err(Error::DimensionMismatch {
                expected: set.len(),
                actual: self.entries.len(),
            });
        }
        Ok(())
    }
}

/// Measures every projector of `set` once on `backend`.
pub fn acquire_counts(
    backend: &mut MeasurementBackend,
    set: &TomographySet,
) -> Result<CountVector> {
    if backend.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: backend.dim(),
            actual: set.dim(),
        });
    }
    let entries = set
        .projectors()
        .iter()
        .map(|psi| {
            let o = backend.measure_projector(psi)?;
            Ok(CountEntry {
                successes: o.successes,
                trials: o.trials,
                frequency: o.frequency,
                exact: o.exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountVector { entries })
}
