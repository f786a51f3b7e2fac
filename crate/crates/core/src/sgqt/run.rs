use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::objective::{
    importance_weighted_fidelity, partial_fidelity, sample_pauli_subset, PauliSubset,
    SubsetSampling, DENOMINATOR_FLOOR,
};
use super::spsa::{gradient_estimate, perturb, step, Perturbation};
use super::GainSchedule;
use crate::error::{invalid, Error, Result};
use crate::measure::MeasurementBackend;
use crate::qcore::{expectation, DensityMatrix, PauliOp, PureState};

/// Attempts with a fresh direction before a degenerate update aborts the run.
pub const DEGENERATE_RETRIES: usize = 3;

/// How the two-qubit Pauli ratio objective is evaluated at `Φ±`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PartialFidelityMode {
    /// One subset drawn with replacement from the squared-Pauli weights of
    /// both probes, measured once and reweighted for each probe.
    #[default]
    SharedReweighted,
    /// Distinct subset drawn at `φ_k`; each probe measures every term and
    /// averages measured-over-predicted ratios.
    Literal,
}

/// What the optimizer ascends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Objective {
    /// Projector expectation `⟨φ|ρ|φ⟩`, one measurement per probe.
    Projector,
    /// Fidelity estimated from a random subset of Pauli correlators.
    PartialFidelity {
        subset_size: usize,
        #[serde(default = "default_floor")]
        floor: f64,
        #[serde(default)]
        mode: PartialFidelityMode,
    },
}

fn default_floor() -> f64 {
    DENOMINATOR_FLOOR
}

impl Objective {
    pub fn partial_fidelity(subset_size: usize) -> Self {
        Self::PartialFidelity {
            subset_size,
            floor: DENOMINATOR_FLOOR,
            mode: PartialFidelityMode::SharedReweighted,
        }
    }

    /// Non-identity Pauli measurements made per iteration, on average at most.
    pub fn measurements_per_iteration(&self) -> usize {
        match self {
            Objective::Projector => 2,
            Objective::PartialFidelity {
                subset_size, mode, ..
            } => match mode {
                PartialFidelityMode::SharedReweighted => *subset_size,
                PartialFidelityMode::Literal => 2 * subset_size,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SgqtConfig {
    pub iterations: usize,
    pub gains: GainSchedule,
    pub initial_state: PureState,
    pub objective: Objective,
    pub rng_seed: u64,
}

impl SgqtConfig {
    /// Projector objective on one qubit, starting from `|0⟩`.
    pub fn single_qubit(iterations: usize, gains: GainSchedule, rng_seed: u64) -> Self {
        Self {
            iterations,
            gains,
            initial_state: PureState::zero(1).expect("one qubit"),
            objective: Objective::Projector,
            rng_seed,
        }
    }

    /// Partial-fidelity objective on two qubits, starting from `|00⟩`.
    pub fn two_qubit(
        iterations: usize,
        gains: GainSchedule,
        subset_size: usize,
        rng_seed: u64,
    ) -> Self {
        Self {
            iterations,
            gains,
            initial_state: PureState::zero(2).expect("two qubits"),
            objective: Objective::partial_fidelity(subset_size),
            rng_seed,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(invalid("iterations must be ≥ 1"));
        }
        self.gains.validate()?;
        if self.initial_state.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: self.initial_state.dim(),
            });
        }
        if let Objective::PartialFidelity {
            subset_size, floor, ..
        } = self.objective
        {
            if dim != 4 {
                return Err(invalid("the partial-fidelity objective needs two qubits"));
            }
            if !(1..=16).contains(&subset_size) {
                return Err(invalid(format!(
                    "subset size {subset_size} outside [1, 16]"
                )));
            }
            if !(floor.is_finite() && floor >= 0.0) {
                return Err(invalid(format!("denominator floor {floor} must be ≥ 0")));
            }
        }
        Ok(())
    }
}

/// State of the run after `k` updates.
///
/// `alpha`, `beta` and `g` are the values of the update that produced this
/// estimate (`α_{k−1}`, `β_{k−1}`, `g_{k−1}`); they are zero for `k = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub estimate: PureState,
    pub alpha: f64,
    pub beta: f64,
    pub g: f64,
    pub photons_cumulative: u64,
    /// `⟨φ_k|benchmark|φ_k⟩`.
    pub fidelity: f64,
    /// Pauli indices shared by both probes of the update, when applicable.
    pub subset: Option<Vec<usize>>,
    pub objective_plus: Option<f64>,
    pub objective_minus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// `N + 1` rows, from the initial state to the final estimate.
    pub iterations: Vec<IterationRecord>,
    pub final_estimate: PureState,
    pub degenerate_retries: usize,
    pub no_photon_events: u64,
}

impl RunRecord {
    pub fn final_fidelity(&self) -> f64 {
        self.iterations.last().map_or(f64::NAN, |r| r.fidelity)
    }

    pub fn photons_used(&self) -> u64 {
        self.iterations.last().map_or(0, |r| r.photons_cumulative)
    }
}

struct Probes {
    plus: f64,
    minus: f64,
    subset: Option<Vec<usize>>,
}

fn evaluate(
    objective: &Objective,
    backend: &mut MeasurementBackend,
    phi: &PureState,
    plus: &PureState,
    minus: &PureState,
    rng: &mut ChaCha8Rng,
) -> Result<Probes> {
    match *objective {
        Objective::Projector => Ok(Probes {
            plus: backend.measure_expectation(plus)?,
            minus: backend.measure_expectation(minus)?,
            subset: None,
        }),
        Objective::PartialFidelity {
            subset_size,
            floor,
            mode: PartialFidelityMode::SharedReweighted,
        } => {
            let refs = [plus.clone(), minus.clone()];
            let subset: PauliSubset = sample_pauli_subset(
                &refs,
                subset_size,
                floor,
                SubsetSampling::WithReplacement,
                rng,
            )?;
            let measured = subset
                .indices
                .iter()
                .map(|&i| backend.measure_pauli(&PauliOp::from_index(i, phi.n_qubits())?))
                .collect::<Result<Vec<f64>>>()?;
            Ok(Probes {
                plus: importance_weighted_fidelity(plus, &subset, &measured)?,
                minus: importance_weighted_fidelity(minus, &subset, &measured)?,
                subset: Some(subset.indices),
            })
        }
        Objective::PartialFidelity {
            subset_size,
            floor,
            mode: PartialFidelityMode::Literal,
        } => {
            let subset = sample_pauli_subset(
                std::slice::from_ref(phi),
                subset_size,
                floor,
                SubsetSampling::Distinct,
                rng,
            )?;
            Ok(Probes {
                plus: partial_fidelity(backend, plus, &subset.indices, floor)?,
                minus: partial_fidelity(backend, minus, &subset.indices, floor)?,
                subset: Some(subset.indices),
            })
        }
    }
}

/// Runs the self-guided estimator for `config.iterations` updates.
///
/// Each update draws a Rademacher direction, evaluates the objective at
/// `normalize(φ_k ± β_kΔ_k)`, and steps along `Δ_k` by `α_k g_k`. A
/// degenerate probe or update is retried with a fresh direction up to
/// [`DEGENERATE_RETRIES`] times before the run aborts.
pub fn run_sgqt(
    config: &SgqtConfig,
    backend: &mut MeasurementBackend,
    benchmark: &DensityMatrix,
) -> Result<RunRecord> {
    config.validate(backend.dim())?;
    if benchmark.dim() != backend.dim() {
        return Err(Error::DimensionMismatch {
            expected: backend.dim(),
            actual: benchmark.dim(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let photons_start = backend.photons_consumed();
    let no_photon_start = backend.no_photon_events();
    let mut phi = config.initial_state.clone();
    let mut rows = Vec::with_capacity(config.iterations + 1);
    rows.push(IterationRecord {
        k: 0,
        estimate: phi.clone(),
        alpha: 0.0,
        beta: 0.0,
        g: 0.0,
        photons_cumulative: 0,
        fidelity: expectation(benchmark, &phi)?,
        subset: None,
        objective_plus: None,
        objective_minus: None,
    });
    let mut retries = 0;

    for k in 0..config.iterations {
        let alpha = config.gains.alpha(k);
        let beta = config.gains.beta(k);
        let mut attempt = 0;
        let (next, g, probes) = loop {
            let delta = Perturbation::random(phi.dim(), &mut rng);
            let outcome = (|| {
                let plus = perturb(&phi, &delta, beta)?;
                let minus = perturb(&phi, &delta, -beta)?;
                let probes = evaluate(&config.objective, backend, &phi, &plus, &minus, &mut rng)?;
                let g = gradient_estimate(probes.plus, probes.minus, beta)?;
                let next = step(&phi, &delta, g, alpha)?;
                Ok::<_, Error>((next, g, probes))
            })();
            match outcome {
                Ok(v) => break v,
                Err(Error::DegeneratePerturbation { norm }) => {
                    attempt += 1;
                    retries += 1;
                    if attempt > DEGENERATE_RETRIES {
                        return Err(Error::RunAborted {
                            iteration: k,
                            reason: format!(
                                "{attempt} degenerate directions in a row (last norm {norm:e})"
                            ),
                        });
                    }
                }
                Err(e) => return Err(e),
            }
        };
        phi = next;
        rows.push(IterationRecord {
            k: k + 1,
            estimate: phi.clone(),
            alpha,
            beta,
            g,
            photons_cumulative: backend.photons_consumed() - photons_start,
            fidelity: expectation(benchmark, &phi)?,
            subset: probes.subset,
            objective_plus: Some(probes.plus),
            objective_minus: Some(probes.minus),
        });
    }

    Ok(RunRecord {
        final_estimate: phi,
        iterations: rows,
        degenerate_retries: retries,
        no_photon_events: backend.no_photon_events() - no_photon_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::PhotonBudgetConfig;
    use crate::qcore::c;

    fn plus_state() -> PureState {
        PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn record_shape_and_monotone_photons() {
        let target = plus_state().density_matrix();
        let mut backend = MeasurementBackend::new(
            target.clone(),
            PhotonBudgetConfig::per_iteration_split(7.0, 2).unwrap(),
            None,
            1,
        )
        .unwrap();
        let cfg = SgqtConfig::single_qubit(40, GainSchedule::standard(), 2);
        let rec = run_sgqt(&cfg, &mut backend, &target).unwrap();
        assert_eq!(rec.iterations.len(), 41);
        assert_eq!(rec.iterations[0].k, 0);
        assert!(rec
            .iterations
            .windows(2)
            .all(|w| w[1].photons_cumulative >= w[0].photons_cumulative));
        assert_eq!(rec.photons_used(), backend.photons_consumed());
        assert_eq!(rec.final_estimate, rec.iterations[40].estimate);
    }

    #[test]
    fn same_seed_same_record() {
        let target = PureState::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)])
            .unwrap()
            .density_matrix();
        let run = || {
            let mut backend = MeasurementBackend::new(
                target.clone(),
                PhotonBudgetConfig::per_expectation(50.0).unwrap(),
                None,
                3,
            )
            .unwrap();
            run_sgqt(
                &SgqtConfig::two_qubit(20, GainSchedule::two_qubit(), 4, 4),
                &mut backend,
                &target,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shared_subset_recorded_for_two_qubits() {
        let target = PureState::zero(2).unwrap().density_matrix();
        let mut backend = MeasurementBackend::ideal(target.clone());
        let rec = run_sgqt(
            &SgqtConfig::two_qubit(5, GainSchedule::two_qubit(), 3, 0),
            &mut backend,
            &target,
        )
        .unwrap();
        for row in &rec.iterations[1..] {
            assert_eq!(row.subset.as_ref().unwrap().len(), 3);
        }
        assert!(rec.iterations[0].subset.is_none());
    }

    #[test]
    fn rejects_mismatched_configs() {
        let target = plus_state().density_matrix();
        let mut backend = MeasurementBackend::ideal(target.clone());
        let mut cfg = SgqtConfig::single_qubit(0, GainSchedule::standard(), 0);
        assert!(run_sgqt(&cfg, &mut backend, &target).is_err());
        cfg.iterations = 5;
        cfg.objective = Objective::partial_fidelity(4);
        assert!(run_sgqt(&cfg, &mut backend, &target).is_err());
        let two = SgqtConfig::two_qubit(5, GainSchedule::two_qubit(), 17, 0);
        let t2 = PureState::zero(2).unwrap().density_matrix();
        assert!(run_sgqt(&two, &mut MeasurementBackend::ideal(t2.clone()), &t2).is_err());
    }

    #[test]
    fn noiseless_single_qubit_converges() {
        let target = plus_state().density_matrix();
        let mut backend = MeasurementBackend::ideal(target.clone());
        let rec = run_sgqt(
            &SgqtConfig::single_qubit(100, GainSchedule::standard(), 7),
            &mut backend,
            &target,
        )
        .unwrap();
        assert!(rec.final_fidelity() > 0.99, "{}", rec.final_fidelity());
    }
}
