use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::MeasurementBackend;
use crate::qcore::{PauliOp, PureState};

/// Default floor on `|⟨Φ|P|Φ⟩|` below which a Pauli is not sampled.
pub const DENOMINATOR_FLOOR: f64 = 1e-3;

/// How Pauli indices are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetSampling {
    /// Distinct indices, weighted sampling without replacement.
    Distinct,
    /// Independent draws; indices may repeat.
    WithReplacement,
}

/// A drawn Pauli subset together with the distribution it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSubset {
    pub indices: Vec<usize>,
    /// Normalized sampling weights over all `d²` Pauli indices.
    pub weights: Vec<f64>,
}

impl PauliSubset {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn pauli_value(phi: &PureState, op: &PauliOp) -> Result<f64> {
    Ok(phi.expectation_of(&op.matrix())?.re)
}

/// Draws Pauli indices weighted by `⟨P⟩²` averaged over `references`.
///
/// Indices whose averaged weight is below `floor²` are ineligible; with a
/// single reference this is `|⟨Φ|P|Φ⟩| < floor`. Distinct sampling returns
/// every eligible index (in index order) when there are no more than `size`.
pub fn sample_pauli_subset<R: Rng + ?Sized>(
    references: &[PureState],
    size: usize,
    floor: f64,
    sampling: SubsetSampling,
    rng: &mut R,
) -> Result<PauliSubset> {
    let first = references
        .first()
        .ok_or_else(|| invalid("at least one reference state is required"))?;
    let n = first.n_qubits();
    let ops = PauliOp::all(n);
    if size == 0 || size > ops.len() {
        return Err(invalid(format!(
            "subset size {size} outside [1, {}]",
            ops.len()
        )));
    }
    let mut weights = vec![0.0; ops.len()];
    for phi in references {
        if phi.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                actual: phi.dim(),
            });
        }
        for (w, op) in weights.iter_mut().zip(&ops) {
            *w += pauli_value(phi, op)?.powi(2) / references.len() as f64;
        }
    }
    for w in weights.iter_mut() {
        if *w < floor * floor {
            *w = 0.0;
        }
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ObjectiveUndefined { floor });
    }
    weights.iter_mut().for_each(|w| *w /= total);

    let eligible: Vec<usize> = (0..ops.len()).filter(|&i| weights[i] > 0.0).collect();
    let indices = match sampling {
        SubsetSampling::WithReplacement => {
            let dist = WeightedIndex::new(&weights)
                .map_err(|e| invalid(format!("sampling weights: {e}")))?;
            (0..size).map(|_| dist.sample(rng)).collect()
        }
        SubsetSampling::Distinct if eligible.len() <= size => eligible,
        SubsetSampling::Distinct => eligible
            .choose_multiple_weighted(rng, size, |&i| weights[i])
            .map_err(|e| invalid(format!("sampling weights: {e}")))?
            .copied()
            .collect(),
    };
    Ok(PauliSubset { indices, weights })
}

/// Mean over `subset` of measured `Tr(ρP)` divided by predicted `⟨Φ|P|Φ⟩`.
///
/// Terms whose prediction falls below `floor` in magnitude are skipped and
/// the mean is taken over the remaining ones. Each retained term is a fresh
/// measurement on `backend`.
pub fn partial_fidelity(
    backend: &mut MeasurementBackend,
    phi: &PureState,
    subset: &[usize],
    floor: f64,
) -> Result<f64> {
    if subset.is_empty() {
        return Err(invalid("Pauli subset must not be empty"));
    }
    let mut total = 0.0;
    let mut used = 0usize;
    for &index in subset {
        let op = PauliOp::from_index(index, phi.n_qubits())?;
        let predicted = pauli_value(phi, &op)?;
        if predicted.abs() < floor {
            continue;
        }
        total += backend.measure_pauli(&op)? / predicted;
        used += 1;
    }
    if used == 0 {
        return Err(Error::ObjectiveUndefined { floor });
    }
    Ok(total / used as f64)
}

/// Importance-weighted fidelity estimate from shared Pauli measurements.
///
/// With `P_i` drawn i.i.d. from `subset.weights` (`q`) and measured values
/// `m_i`, returns `(1/|M|) Σ m_i ⟨Φ|P_i|Φ⟩ / (d q_i)`, an unbiased estimate of
/// `⟨Φ|ρ|Φ⟩`. When `q ∝ ⟨Φ|P|Φ⟩²` it reduces to the measured-over-predicted
/// ratio average.
pub fn importance_weighted_fidelity(
    phi: &PureState,
    subset: &PauliSubset,
    measured: &[f64],
) -> Result<f64> {
    if subset.indices.len() != measured.len() {
        return Err(invalid("one measured value per subset index is required"));
    }
    if subset.is_empty() {
        return Err(invalid("Pauli subset must not be empty"));
    }
    let d = phi.dim() as f64;
    let mut total = 0.0;
    for (&index, &m) in subset.indices.iter().zip(measured) {
        let op = PauliOp::from_index(index, phi.n_qubits())?;
        let q = subset.weights[index];
        if q <= 0.0 {
            return Err(invalid(format!("Pauli {index} has zero sampling weight")));
        }
        total += m * pauli_value(phi, &op)? / (d * q);
    }
    Ok(total / subset.len() as f64)
}
