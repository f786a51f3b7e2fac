use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{BenchmarkMode, ExperimentSpec, PhotonSpec};
use super::stats::{infidelity_reduction, SummaryStats};
use crate::error::{invalid, Result};
use crate::measure::{AccountingMode, MeasurementBackend, PhotonBudgetConfig, WaveplateErrorModel};
use crate::qcore::{DensityMatrix, PureState};
use crate::sgqt::{run_sgqt, Objective, RunRecord, SgqtConfig, DENOMINATOR_FLOOR};
use crate::sqt::{acquire_counts, mle_estimate, run_sqt, SqtOutcome, TomographySet};

/// Smallest mean photon number per projector a budget-matched SQT arm uses.
pub const MIN_PHOTONS_PER_PROJECTOR: f64 = 7.0;

const ARM_BACKEND: u64 = 0;
const ARM_SPSA: u64 = 1;
const ARM_SQT: u64 = 2;
const FIXED_BUDGET_CONDITION: u64 = 0x800;

/// Independent 64-bit seed for stream `stream` of a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.next_u64()
}

fn cell_stream(target: usize, condition: u64, trial: usize, arm: u64) -> u64 {
    ((target as u64) << 48) | (condition << 36) | ((trial as u64) << 12) | arm
}

/// Per-projector photon mean for an SQT arm with a total `budget`.
pub fn matched_budget_lambda(budget: f64, set_size: usize) -> Result<f64> {
    if set_size == 0 {
        return Err(invalid("empty tomography set"));
    }
    let minimum = MIN_PHOTONS_PER_PROJECTOR * set_size as f64;
    if !(budget >= minimum) {
        return Err(invalid(format!(
            "budget {budget} below the minimum {minimum} for {set_size} projectors"
        )));
    }
    Ok(budget / set_size as f64)
}

/// Runs SQT at the cumulative photon count of `record` at each checkpoint
/// iteration, splitting each budget evenly over `set`.
///
/// Budgets below the minimum yield an error entry for that checkpoint.
pub fn matched_budget_sqt(
    record: &RunRecord,
    checkpoints: &[usize],
    true_state: &DensityMatrix,
    benchmark: &DensityMatrix,
    set: &TomographySet,
    seed_for: impl Fn(usize) -> u64,
) -> Vec<Result<(usize, f64, SqtOutcome)>> {
    checkpoints
        .iter()
        .enumerate()
        .map(|(ci, &k)| {
            let row = record
                .iterations
                .get(k)
                .ok_or_else(|| invalid(format!("checkpoint {k} beyond the run")))?;
            let budget = row.photons_cumulative as f64;
            let lambda = matched_budget_lambda(budget, set.len())?;
            let mut backend = MeasurementBackend::new(
                true_state.clone(),
                PhotonBudgetConfig::per_expectation(lambda)?,
                None,
                seed_for(ci),
            )?;
            Ok((k, budget, run_sqt(&mut backend, set, benchmark)?))
        })
        .collect()
}

/// One experimental condition: a subset size and/or an error level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub label: String,
    pub subset_size: Option<usize>,
    pub sigma_degrees: Option<f64>,
}

pub fn conditions(spec: &ExperimentSpec) -> Vec<Condition> {
    let sizes: Vec<Option<usize>> = if spec.n_qubits() == 2 {
        spec.subset_sizes.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    let sigmas: Vec<Option<f64>> = if spec.kind.has_errors() {
        spec.error_levels.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    let mut out = Vec::new();
    for &m in &sizes {
        for &sigma in &sigmas {
            let mut parts = Vec::new();
            if let Some(m) = m {
                parts.push(format!("m={m}"));
            }
            if let Some(s) = sigma {
                parts.push(format!("sigma={s}"));
            }
            let label = if parts.is_empty() {
                "sgqt".to_string()
            } else {
                parts.join(";")
            };
            out.push(Condition {
                label,
                subset_size: m,
                sigma_degrees: sigma,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SqtArm {
    /// Same total photons as the SGQT trial at a checkpoint.
    MatchedBudget,
    /// Repeated reconstructions with the SGQT per-measurement photon rate.
    MatchedMeasurements,
    /// A fixed expected budget independent of any SGQT trial.
    FixedBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub condition: String,
    pub target: usize,
    pub trial: usize,
    pub run: RunRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqtRecord {
    pub arm: SqtArm,
    pub condition: String,
    pub target: usize,
    pub trial: usize,
    /// SGQT iteration the budget was matched to.
    pub iteration: Option<usize>,
    pub budget: f64,
    pub photons: u64,
    /// Mean over repetitions for matched-measurement arms.
    pub fidelity: f64,
    pub repetitions: usize,
    pub mle_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingCell {
    pub arm: String,
    pub condition: String,
    pub target: usize,
    pub trial: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub iteration: usize,
    pub sgqt: Option<SummaryStats>,
    pub sgqt_photons_mean: Option<f64>,
    pub sqt: Option<SummaryStats>,
    pub sqt_photons_mean: Option<f64>,
}

/// Aggregates of one condition.
///
/// `sgqt_band`/`sqt_band` hold one value per repetition (the fidelity
/// averaged over targets); the pooled statistics and the paired metrics use
/// every (target, repetition) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub sgqt_band: Option<SummaryStats>,
    pub sgqt_pooled: Option<SummaryStats>,
    pub sgqt_photons_mean: Option<f64>,
    pub sqt_band: Option<SummaryStats>,
    pub sqt_pooled: Option<SummaryStats>,
    pub sqt_photons_mean: Option<f64>,
    /// Reduction computed from the pooled mean fidelities.
    pub infidelity_reduction: Option<f64>,
    /// Fraction of pairs whose reduction is positive (SGQT closer to the benchmark).
    pub sgqt_win_fraction: Option<f64>,
    pub pairs: usize,
    pub missing: usize,
    pub checkpoints: Vec<CheckpointSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub targets: Vec<PureState>,
    pub conditions: Vec<Condition>,
    pub sgqt: Vec<TrialRecord>,
    pub sqt: Vec<SqtRecord>,
    pub missing: Vec<MissingCell>,
    pub summary: Vec<ConditionSummary>,
}

/// One CSV row of an SGQT trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow<'a> {
    pub experiment: &'a str,
    pub condition: &'a str,
    pub trial: usize,
    pub iteration: usize,
    pub photons_cumulative: u64,
    pub fidelity: f64,
    pub alpha: f64,
    pub beta: f64,
    pub g: f64,
}

impl ExperimentResult {
    /// Global trial index: `target · repetitions + repetition`.
    pub fn global_trial(&self, target: usize, trial: usize) -> usize {
        target * self.spec.repetitions + trial
    }

    pub fn trajectory_rows(&self) -> Vec<TrajectoryRow<'_>> {
        let experiment = self.spec.kind.name();
        self.sgqt
            .iter()
            .flat_map(|t| {
                let trial = self.global_trial(t.target, t.trial);
                t.run.iterations.iter().map(move |r| TrajectoryRow {
                    experiment,
                    condition: &t.condition,
                    trial,
                    iteration: r.k,
                    photons_cumulative: r.photons_cumulative,
                    fidelity: r.fidelity,
                    alpha: r.alpha,
                    beta: r.beta,
                    g: r.g,
                })
            })
            .collect()
    }

    pub fn summary_for(&self, condition: &str) -> Option<&ConditionSummary> {
        self.summary.iter().find(|s| s.condition == condition)
    }
}

enum Job {
    Sgqt {
        target: usize,
        condition: usize,
        trial: usize,
    },
    FixedBudget {
        target: usize,
        budget: usize,
        trial: usize,
    },
}

enum JobOutput {
    Sgqt(Option<TrialRecord>, Vec<SqtRecord>, Vec<MissingCell>),
    Sqt(std::result::Result<SqtRecord, MissingCell>),
}

struct Context<'a> {
    spec: &'a ExperimentSpec,
    targets: Vec<DensityMatrix>,
    benchmarks: Vec<DensityMatrix>,
    conditions: Vec<Condition>,
    set: TomographySet,
}

fn photon_config(photons: Option<PhotonSpec>, objective: &Objective) -> Result<PhotonBudgetConfig> {
    match photons {
        None => Ok(PhotonBudgetConfig::ideal()),
        Some(PhotonSpec {
            mean,
            accounting: AccountingMode::PerExpectation,
        }) => PhotonBudgetConfig::per_expectation(mean),
        Some(PhotonSpec {
            mean,
            accounting: AccountingMode::PerIterationSplit,
        }) => PhotonBudgetConfig::per_iteration_split(mean, objective.measurements_per_iteration()),
    }
}

impl Context<'_> {
    fn seed(&self, target: usize, condition: u64, trial: usize, arm: u64) -> u64 {
        derive_seed(self.spec.seed, cell_stream(target, condition, trial, arm))
    }

    fn objective(&self, condition: &Condition) -> Objective {
        match condition.subset_size {
            None => Objective::Projector,
            Some(m) => Objective::PartialFidelity {
                subset_size: m,
                floor: DENOMINATOR_FLOOR,
                mode: self.spec.objective_mode,
            },
        }
    }

    fn error_model(&self, condition: &Condition) -> Result<Option<WaveplateErrorModel>> {
        condition
            .sigma_degrees
            .map(|s| WaveplateErrorModel::new(s, self.spec.error_redraw))
            .transpose()
    }

    fn run_sgqt_cell(&self, target: usize, ci: usize, trial: usize) -> JobOutput {
        let condition = &self.conditions[ci];
        let missing = |arm: &str, reason: String| MissingCell {
            arm: arm.to_string(),
            condition: condition.label.clone(),
            target,
            trial,
            reason,
        };
        let objective = self.objective(condition);
        let run = (|| {
            let mut backend = MeasurementBackend::new(
                self.targets[target].clone(),
                photon_config(self.spec.photons, &objective)?,
                self.error_model(condition)?,
                self.seed(target, ci as u64, trial, ARM_BACKEND),
            )?;
            let config = SgqtConfig {
                iterations: self.spec.iterations,
                gains: self.spec.gains,
                initial_state: PureState::zero(self.spec.n_qubits())?,
                objective,
                rng_seed: self.seed(target, ci as u64, trial, ARM_SPSA),
            };
            run_sgqt(&config, &mut backend, &self.benchmarks[target])
        })();
        let run = match run {
            Ok(r) => r,
            Err(e) => {
                return JobOutput::Sgqt(None, Vec::new(), vec![missing("sgqt", e.to_string())])
            }
        };

        let mut sqt = Vec::new();
        let mut missed = Vec::new();
        if self.spec.kind.has_matched_budget_sqt() && self.spec.photons.is_some() {
            let results = matched_budget_sqt(
                &run,
                &self.spec.checkpoints,
                &self.targets[target],
                &self.benchmarks[target],
                &self.set,
                |i| self.seed(target, ci as u64, trial, ARM_SQT + i as u64),
            );
            for r in results {
                match r {
                    Ok((k, budget, outcome)) => sqt.push(SqtRecord {
                        arm: SqtArm::MatchedBudget,
                        condition: condition.label.clone(),
                        target,
                        trial,
                        iteration: Some(k),
                        budget,
                        photons: outcome.photons_used,
                        fidelity: outcome.fidelity,
                        repetitions: 1,
                        mle_converged: outcome.mle_converged,
                    }),
                    Err(e) => missed.push(missing("sqt-matched-budget", e.to_string())),
                }
            }
        }
        if self.spec.kind.has_errors() {
            match self.matched_measurement_sqt(target, ci, trial) {
                Ok(r) => sqt.push(r),
                Err(e) => missed.push(missing("sqt-matched-measurements", e.to_string())),
            }
        }
        JobOutput::Sgqt(
            Some(TrialRecord {
                condition: condition.label.clone(),
                target,
                trial,
                run,
            }),
            sqt,
            missed,
        )
    }

    fn matched_measurement_sqt(&self, target: usize, ci: usize, trial: usize) -> Result<SqtRecord> {
        let condition = &self.conditions[ci];
        let reps = self.spec.sqt_repetitions_for(condition.subset_size);
        let objective = self.objective(condition);
        let per_measurement = photon_config(self.spec.photons, &objective)?;
        let mut fidelity = 0.0;
        let mut photons = 0;
        let mut converged = true;
        for rep in 0..reps {
            let mut backend = MeasurementBackend::new(
                self.targets[target].clone(),
                PhotonBudgetConfig {
                    accounting_mode: AccountingMode::PerExpectation,
                    ..per_measurement
                },
                self.error_model(condition)?,
                self.seed(target, ci as u64, trial, ARM_SQT + rep as u64),
            )?;
            let outcome = run_sqt(&mut backend, &self.set, &self.benchmarks[target])?;
            fidelity += outcome.fidelity / reps as f64;
            photons += outcome.photons_used;
            converged &= outcome.mle_converged;
        }
        let budget = per_measurement
            .mean_photons_per_expectation
            .map_or(0.0, |l| l * (self.set.len() * reps) as f64);
        Ok(SqtRecord {
            arm: SqtArm::MatchedMeasurements,
            condition: condition.label.clone(),
            target,
            trial,
            iteration: Some(self.spec.iterations),
            budget,
            photons,
            fidelity,
            repetitions: reps,
            mle_converged: converged,
        })
    }

    fn run_fixed_budget_cell(&self, target: usize, bi: usize, trial: usize) -> JobOutput {
        let budget = self.spec.sqt_budgets[bi];
        let label = fixed_budget_label(budget);
        let outcome = (|| {
            let lambda = budget / self.set.len() as f64;
            let mut backend = MeasurementBackend::new(
                self.targets[target].clone(),
                PhotonBudgetConfig::per_expectation(lambda)?,
                None,
                self.seed(target, FIXED_BUDGET_CONDITION + bi as u64, trial, ARM_SQT),
            )?;
            run_sqt(&mut backend, &self.set, &self.benchmarks[target])
        })();
        JobOutput::Sqt(match outcome {
            Ok(o) => Ok(SqtRecord {
                arm: SqtArm::FixedBudget,
                condition: label,
                target,
                trial,
                iteration: None,
                budget,
                photons: o.photons_used,
                fidelity: o.fidelity,
                repetitions: 1,
                mle_converged: o.mle_converged,
            }),
            Err(e) => Err(MissingCell {
                arm: "sqt-fixed-budget".to_string(),
                condition: label,
                target,
                trial,
                reason: e.to_string(),
            }),
        })
    }
}

pub fn fixed_budget_label(budget: f64) -> String {
    format!("sqt-budget={budget}")
}

fn benchmark_for(
    spec: &ExperimentSpec,
    set: &TomographySet,
    target: usize,
    state: &DensityMatrix,
) -> Result<DensityMatrix> {
    match spec.benchmark {
        BenchmarkMode::Exact => Ok(state.clone()),
        BenchmarkMode::SimulatedSqt { total_photons } => {
            let mut backend = MeasurementBackend::new(
                state.clone(),
                PhotonBudgetConfig::per_expectation(total_photons / set.len() as f64)?,
                None,
                derive_seed(spec.seed, u64::MAX - target as u64),
            )?;
            let counts = acquire_counts(&mut backend, set)?;
            Ok(mle_estimate(&counts, set)?.state)
        }
    }
}

/// Runs every (target × condition × repetition) cell of `spec` in parallel
/// and aggregates the results.
///
/// Each cell owns its backends and seeds, derived from `spec.seed` and the
/// cell coordinates, so results do not depend on scheduling. Failed cells
/// are reported in `missing` and excluded from the statistics.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let n = spec.n_qubits();
    let targets = spec.targets.states(n)?;
    let set = TomographySet::standard(n)?;
    let densities: Vec<DensityMatrix> = targets.iter().map(|t| t.density_matrix()).collect();
    let benchmarks = densities
        .iter()
        .enumerate()
        .map(|(i, rho)| benchmark_for(spec, &set, i, rho))
        .collect::<Result<Vec<_>>>()?;
    let ctx = Context {
        spec,
        targets: densities,
        benchmarks,
        conditions: conditions(spec),
        set,
    };

    let mut jobs = Vec::new();
    for target in 0..targets.len() {
        for condition in 0..ctx.conditions.len() {
            for trial in 0..spec.repetitions {
                jobs.push(Job::Sgqt {
                    target,
                    condition,
                    trial,
                });
            }
        }
        for budget in 0..spec.sqt_budgets.len() {
            for trial in 0..spec.repetitions {
                jobs.push(Job::FixedBudget {
                    target,
                    budget,
                    trial,
                });
            }
        }
    }
    let outputs: Vec<JobOutput> = jobs
        .par_iter()
        .map(|job| match *job {
            Job::Sgqt {
                target,
                condition,
                trial,
            } => ctx.run_sgqt_cell(target, condition, trial),
            Job::FixedBudget {
                target,
                budget,
                trial,
            } => ctx.run_fixed_budget_cell(target, budget, trial),
        })
        .collect();

    let mut sgqt = Vec::new();
    let mut sqt = Vec::new();
    let mut missing = Vec::new();
    for out in outputs {
        match out {
            JobOutput::Sgqt(t, s, m) => {
                sgqt.extend(t);
                sqt.extend(s);
                missing.extend(m);
            }
            JobOutput::Sqt(Ok(s)) => sqt.push(s),
            JobOutput::Sqt(Err(m)) => missing.push(m),
        }
    }
    let summary = summarize(spec, &ctx.conditions, &sgqt, &sqt, &missing);
    Ok(ExperimentResult {
        spec: spec.clone(),
        targets,
        conditions: ctx.conditions,
        sgqt,
        sqt,
        missing,
        summary,
    })
}

fn band(values: &[(usize, usize, f64)], repetitions: usize) -> Option<SummaryStats> {
    let per_rep: Vec<f64> = (0..repetitions)
        .filter_map(|r| {
            let v: Vec<f64> = values.iter().filter(|x| x.1 == r).map(|x| x.2).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect();
    SummaryStats::from_values(&per_rep)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Recomputes all condition summaries from raw records.
pub fn summarize(
    spec: &ExperimentSpec,
    conditions: &[Condition],
    sgqt: &[TrialRecord],
    sqt: &[SqtRecord],
    missing: &[MissingCell],
) -> Vec<ConditionSummary> {
    let mut out = Vec::new();
    for condition in conditions {
        let label = &condition.label;
        let runs: Vec<&TrialRecord> = sgqt.iter().filter(|t| &t.condition == label).collect();
        let finals: Vec<(usize, usize, f64)> = runs
            .iter()
            .map(|t| (t.target, t.trial, t.run.final_fidelity()))
            .collect();
        // the paired SQT arm: matched measurements, or the last matched budget
        let paired_iteration = spec.iterations;
        let paired: Vec<&SqtRecord> = sqt
            .iter()
            .filter(|s| &s.condition == label && s.arm != SqtArm::FixedBudget)
            .filter(|s| s.iteration == Some(paired_iteration))
            .collect();
        let sqt_values: Vec<(usize, usize, f64)> = paired
            .iter()
            .map(|s| (s.target, s.trial, s.fidelity))
            .collect();

        let mut reductions = Vec::new();
        for &(t, r, f) in &finals {
            if let Some(&(_, _, q)) = sqt_values.iter().find(|x| x.0 == t && x.1 == r) {
                reductions.push(infidelity_reduction(f, q).ok());
            }
        }
        let pairs = reductions.len();
        let wins = reductions
            .iter()
            .filter(|r| matches!(r, Some(x) if *x > 0.0))
            .count();

        let sgqt_pooled =
            SummaryStats::from_values(&finals.iter().map(|x| x.2).collect::<Vec<_>>());
        let sqt_pooled =
            SummaryStats::from_values(&sqt_values.iter().map(|x| x.2).collect::<Vec<_>>());
        let infidelity_reduction_of_means = match (sgqt_pooled, sqt_pooled) {
            (Some(a), Some(b)) => infidelity_reduction(a.mean, b.mean).ok(),
            _ => None,
        };

        let checkpoints = spec
            .checkpoints
            .iter()
            .map(|&k| {
                let at_k: Vec<f64> = runs
                    .iter()
                    .filter_map(|t| t.run.iterations.get(k).map(|r| r.fidelity))
                    .collect();
                let matched: Vec<&SqtRecord> = sqt
                    .iter()
                    .filter(|s| {
                        &s.condition == label
                            && s.arm == SqtArm::MatchedBudget
                            && s.iteration == Some(k)
                    })
                    .collect();
                CheckpointSummary {
                    iteration: k,
                    sgqt: SummaryStats::from_values(&at_k),
                    sgqt_photons_mean: mean(runs.iter().filter_map(|t| {
                        t.run.iterations.get(k).map(|r| r.photons_cumulative as f64)
                    })),
                    sqt: SummaryStats::from_values(
                        &matched.iter().map(|s| s.fidelity).collect::<Vec<_>>(),
                    ),
                    sqt_photons_mean: mean(matched.iter().map(|s| s.photons as f64)),
                }
            })
            .collect();

        out.push(ConditionSummary {
            condition: label.clone(),
            sgqt_band: band(&finals, spec.repetitions),
            sgqt_pooled,
            sgqt_photons_mean: mean(runs.iter().map(|t| t.run.photons_used() as f64)),
            sqt_band: band(&sqt_values, spec.repetitions),
            sqt_pooled,
            sqt_photons_mean: mean(paired.iter().map(|s| s.photons as f64)),
            infidelity_reduction: infidelity_reduction_of_means,
            sgqt_win_fraction: (pairs > 0).then(|| wins as f64 / pairs as f64),
            pairs,
            missing: missing.iter().filter(|m| &m.condition == label).count(),
            checkpoints,
        });
    }
    for &budget in &spec.sqt_budgets {
        let label = fixed_budget_label(budget);
        let values: Vec<(usize, usize, f64)> = sqt
            .iter()
            .filter(|s| s.arm == SqtArm::FixedBudget && s.condition == label)
            .map(|s| (s.target, s.trial, s.fidelity))
            .collect();
        out.push(ConditionSummary {
            sqt_band: band(&values, spec.repetitions),
            sqt_pooled: SummaryStats::from_values(&values.iter().map(|x| x.2).collect::<Vec<_>>()),
            sqt_photons_mean: mean(
                sqt.iter()
                    .filter(|s| s.arm == SqtArm::FixedBudget && s.condition == label)
                    .map(|s| s.photons as f64),
            ),
            missing: missing.iter().filter(|m| m.condition == label).count(),
            condition: label,
            sgqt_band: None,
            sgqt_pooled: None,
            sgqt_photons_mean: None,
            infidelity_reduction: None,
            sgqt_win_fraction: None,
            pairs: 0,
            checkpoints: Vec::new(),
        });
    }
    out
}
