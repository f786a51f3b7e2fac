use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::jones::{projector_to_waveplate_angles, WaveplateSetting};
use crate::error::{invalid, Error, Result};
use crate::qcore::{clamp_to_range, DensityMatrix, PauliOp, PureState};

/// How a photon budget is spread over measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccountingMode {
    /// The configured mean applies to every measurement.
    PerExpectation,
    /// The configured mean is a per-iteration total split evenly over the
    /// measurements of one iteration.
    PerIterationSplit,
}

/// Photon statistics of a backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonBudgetConfig {
    /// Poisson mean per measurement; `None` is the noiseless limit.
    pub mean_photons_per_expectation: Option<f64>,
    pub accounting_mode: AccountingMode,
}

impl PhotonBudgetConfig {
    pub fn ideal() -> Self {
        Self {
            mean_photons_per_expectation: None,
            accounting_mode: AccountingMode::PerExpectation,
        }
    }

    pub fn per_expectation(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Ok(Self {
            mean_photons_per_expectation: Some(mean),
            accounting_mode: AccountingMode::PerExpectation,
        })
    }

    /// Splits `photons_per_iteration` evenly over `measurements_per_iteration`.
    pub fn per_iteration_split(
        photons_per_iteration: f64,
        measurements_per_iteration: usize,
    ) -> Result<Self> {
        check_mean(photons_per_iteration)?;
        if measurements_per_iteration == 0 {
            return Err(invalid("measurements per iteration must be positive"));
        }
        Ok(Self {
            mean_photons_per_expectation: Some(
                photons_per_iteration / measurements_per_iteration as f64,
            ),
            accounting_mode: AccountingMode::PerIterationSplit,
        })
    }

    pub fn is_ideal(&self) -> bool {
        self.mean_photons_per_expectation.is_none()
    }
}

fn check_mean(mean: f64) -> Result<()> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(invalid(format!(
            "photon mean {mean} must be finite and ≥ 0"
        )));
    }
    Ok(())
}

/// When waveplate angle errors are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorRedraw {
    /// Fresh Gaussian offsets for every measurement setting.
    #[default]
    PerMeasurement,
    /// One set of offsets per backend, held for the whole run.
    PerRun,
}

/// Zero-mean Gaussian error on the analysis waveplate angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveplateErrorModel {
    pub sigma_degrees: f64,
    #[serde(default)]
    pub redraw: ErrorRedraw,
}

impl WaveplateErrorModel {
    /// Sweep levels used by the error experiments, in degrees.
    pub const DEFAULT_LEVELS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

    pub fn new(sigma_degrees: f64, redraw: ErrorRedraw) -> Result<Self> {
        if !(sigma_degrees.is_finite() && sigma_degrees >= 0.0) {
            return Err(invalid(format!("sigma {sigma_degrees} must be ≥ 0")));
        }
        Ok(Self {
            sigma_degrees,
            redraw,
        })
    }

    pub fn is_active(&self) -> bool {
        self.sigma_degrees > 0.0
    }

    /// Checks a sweep list: non-negative and strictly increasing.
    pub fn validate_levels(levels: &[f64]) -> Result<()> {
        if levels.is_empty() {
            return Err(invalid("error levels must not be empty"));
        }
        if levels.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(invalid("error levels must be finite and ≥ 0"));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("error levels must be strictly increasing"));
        }
        Ok(())
    }
}

/// One sampled projector measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    /// `n/N`, the exact probability in ideal mode, or 0.5 when `N = 0`.
    pub frequency: f64,
    pub successes: u64,
    pub trials: u64,
    /// Set in ideal mode, where `frequency` is the exact probability.
    pub exact: bool,
}

impl Outcome {
    pub fn no_photons(&self) -> bool {
        !self.exact && self.trials == 0
    }
}

/// Simulated photon-counting measurement of a fixed true state.
///
/// Single-threaded: holds its own RNG and photon counter. Independent
/// trials use independent backends with distinct seeds.
#[derive(Debug, Clone)]
pub struct MeasurementBackend {
    true_state: DensityMatrix,
    photons: PhotonBudgetConfig,
    error_model: Option<WaveplateErrorModel>,
    seed: u64,
    rng: ChaCha8Rng,
    photons_consumed: u64,
    no_photon_events: u64,
    measurements: u64,
    run_offsets: Vec<(f64, f64)>,
}

impl MeasurementBackend {
    pub fn new(
        true_state: DensityMatrix,
        photons: PhotonBudgetConfig,
        error_model: Option<WaveplateErrorModel>,
        seed: u64,
    ) -> Result<Self> {
        if let Some(mean) = photons.mean_photons_per_expectation {
            check_mean(mean)?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut run_offsets = Vec::new();
        if let Some(model) = error_model.filter(|m| m.is_active()) {
            if model.redraw == ErrorRedraw::PerRun {
                let normal = gaussian(model.sigma_degrees)?;
                run_offsets = (0..true_state.n_qubits())
                    .map(|_| (normal.sample(&mut rng), normal.sample(&mut rng)))
                    .collect();
            }
        }
        Ok(Self {
            true_state,
            photons,
            error_model,
            seed,
            rng,
            photons_consumed: 0,
            no_photon_events: 0,
            measurements: 0,
            run_offsets,
        })
    }

    /// Noiseless backend: exact probabilities, no photons consumed.
    pub fn ideal(true_state: DensityMatrix) -> Self {
        Self::new(true_state, PhotonBudgetConfig::ideal(), None, 0).expect("ideal config")
    }

    pub fn true_state(&self) -> &DensityMatrix {
        &self.true_state
    }

    pub fn photon_config(&self) -> &PhotonBudgetConfig {
        &self.photons
    }

    pub fn error_model(&self) -> Option<&WaveplateErrorModel> {
        self.error_model.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.true_state.dim()
    }

    pub fn n_qubits(&self) -> usize {
        self.true_state.n_qubits()
    }

    pub fn photons_consumed(&self) -> u64 {
        self.photons_consumed
    }

    /// Count of measurements whose Poisson draw was zero.
    pub fn no_photon_events(&self) -> u64 {
        self.no_photon_events
    }

    pub fn measurements(&self) -> u64 {
        self.measurements
    }

    /// Sampled `⟨ψ|ρ|ψ⟩`.
    pub fn measure_expectation(&mut self, psi: &PureState) -> Result<f64> {
        Ok(self.measure_projector(psi)?.frequency)
    }

    /// Measures the projector `|ψ⟩⟨ψ|`, keeping the raw counts.
    ///
    /// With an active error model `ψ` must be a product state: each qubit's
    /// factor is set on its own analysis waveplates.
    pub fn measure_projector(&mut self, psi: &PureState) -> Result<Outcome> {
        self.check_dim(psi.dim())?;
        let projector = match self.active_error() {
            None => psi.clone(),
            Some(model) => self.distorted_projector(psi, model)?,
        };
        let p = crate::qcore::expectation(&self.true_state, &projector)?;
        self.measurements += 1;
        let Some(mean) = self.photons.mean_photons_per_expectation else {
            return Ok(Outcome {
                frequency: p,
                successes: 0,
                trials: 0,
                exact: true,
            });
        };
        let trials = self.draw_photons(mean)?;
        if trials == 0 {
            self.no_photon_events += 1;
            return Ok(Outcome {
                frequency: 0.5,
                successes: 0,
                trials: 0,
                exact: false,
            });
        }
        let successes = Binomial::new(trials, p)
            .map_err(|e| invalid(format!("binomial({trials}, {p}): {e}")))?
            .sample(&mut self.rng);
        Ok(Outcome {
            frequency: successes as f64 / trials as f64,
            successes,
            trials,
            exact: false,
        })
    }

    /// Sampled `Tr(ρP)` from local eigenbasis measurements.
    ///
    /// Each qubit is analysed in the eigenbasis of its Pauli factor (the Z
    /// basis for an identity factor); the joint outcome counts are
    /// multinomial and the returned value is the empirical average of the
    /// outcome eigenvalue products. The all-identity operator is known a
    /// priori and returns 1 without consuming photons.
    pub fn measure_pauli(&mut self, op: &PauliOp) -> Result<f64> {
        self.check_dim(op.dim())?;
        if op.is_identity() {
            return Ok(1.0);
        }
        let error = self.active_error();
        let mut arms = Vec::with_capacity(op.n_qubits());
        for (qubit, factor) in op.factors().iter().enumerate() {
            let (plus, minus) = factor.eigenbasis();
            let basis = match error {
                None => (plus, minus),
                Some(model) => {
                    let setting = projector_to_waveplate_angles(&plus)?;
                    self.perturb_setting(setting, qubit, model)?
                        .analysis_basis()
                }
            };
            arms.push((basis, factor.eigenvalues()));
        }

        // joint outcomes, first qubit most significant
        let n = arms.len();
        let mut probabilities = Vec::with_capacity(1 << n);
        let mut eigenvalues = Vec::with_capacity(1 << n);
        for outcome in 0..(1usize << n) {
            let mut state: Option<PureState> = None;
            let mut value = 1.0;
            for (qubit, ((plus, minus), evs)) in arms.iter().enumerate() {
                let bit = (outcome >> (n - 1 - qubit)) & 1;
                let factor = if bit == 0 { plus } else { minus };
                value *= evs[bit];
                state = Some(match state {
                    None => factor.clone(),
                    Some(s) => s.tensor(factor),
                });
            }
            let state = state.expect("at least one qubit");
            probabilities.push(crate::qcore::expectation(&self.true_state, &state)?);
            eigenvalues.push(value);
        }
        self.measurements += 1;

        let Some(mean) = self.photons.mean_photons_per_expectation else {
            let v: f64 = probabilities
                .iter()
                .zip(&eigenvalues)
                .map(|(p, e)| p * e)
                .sum();
            return clamp_to_range(v, -1.0, 1.0);
        };
        let trials = self.draw_photons(mean)?;
        if trials == 0 {
            self.no_photon_events += 1;
            return Ok(0.0);
        }
        let counts = multinomial(&mut self.rng, trials, &probabilities)?;
        let total: f64 = counts
            .iter()
            .zip(&eigenvalues)
            .map(|(k, e)| *k as f64 * e)
            .sum();
        clamp_to_range(total / trials as f64, -1.0, 1.0)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: dim,
            });
        }
        Ok(())
    }

    fn active_error(&self) -> Option<WaveplateErrorModel> {
        self.error_model.filter(|m| m.is_active())
    }

    fn draw_photons(&mut self, mean: f64) -> Result<u64> {
        let n = if mean <= 0.0 {
            0
        } else {
            let draw: f64 = Poisson::new(mean)
                .map_err(|e| invalid(format!("poisson({mean}): {e}")))?
                .sample(&mut self.rng);
            draw as u64
        };
        self.photons_consumed += n;
        Ok(n)
    }

    fn perturb_setting(
        &mut self,
        setting: WaveplateSetting,
        qubit: usize,
        model: WaveplateErrorModel,
    ) -> Result<WaveplateSetting> {
        let (dq, dh) = match model.redraw {
            ErrorRedraw::PerRun => self.run_offsets[qubit],
            ErrorRedraw::PerMeasurement => {
                let normal = gaussian(model.sigma_degrees)?;
                (normal.sample(&mut self.rng), normal.sample(&mut self.rng))
            }
        };
        Ok(setting.offset(dq, dh))
    }

    fn distorted_projector(
        &mut self,
        psi: &PureState,
        model: WaveplateErrorModel,
    ) -> Result<PureState> {
        let factors = match psi.n_qubits() {
            1 => vec![psi.clone()],
            2 => {
                let (a, b) = psi.factor_product().ok_or_else(|| {
                    invalid("entangled projector cannot be set with local waveplates")
                })?;
                vec![a, b]
            }
            n => return Err(invalid(format!("{n}-qubit projectors are not supported"))),
        };
        let mut out: Option<PureState> = None;
        for (qubit, factor) in factors.iter().enumerate() {
            let setting = projector_to_waveplate_angles(factor)?;
            let (transmitted, _) = self
                .perturb_setting(setting, qubit, model)?
                .analysis_basis();
            out = Some(match out {
                None => transmitted,
                Some(s) => s.tensor(&transmitted),
            });
        }
        Ok(out.expect("at least one factor"))
    }
}

fn gaussian(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma).map_err(|e| invalid(format!("normal(0, {sigma}): {e}")))
}

/// Multinomial draw by sequential conditional binomials.
fn multinomial<R: Rng + ?Sized>(
    rng: &mut R,
    trials: u64,
    probabilities: &[f64],
) -> Result<Vec<u64>> {
    let mut remaining_trials = trials;
    let mut remaining_mass = 1.0;
    let mut counts = Vec::with_capacity(probabilities.len());
    for (i, &p) in probabilities.iter().enumerate() {
        if i + 1 == probabilities.len() {
            counts.push(remaining_trials);
            break;
        }
        let k = if remaining_trials == 0 || remaining_mass <= 0.0 {
            0
        } else {
            let q = (p / remaining_mass).clamp(0.0, 1.0);
            Binomial::new(remaining_trials, q)
                .map_err(|e| invalid(format!("binomial: {e}")))?
                .sample(rng)
        };
        counts.push(k);
        remaining_trials -= k;
        remaining_mass -= p;
    }
    Ok(counts)
}
