use nalgebra::DVector;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::qcore::{c, Complex64, PureState};

/// Rademacher direction over the `2d` real parameters of a state.
///
/// Entries are interleaved `(Re a₀, Im a₀, Re a₁, Im a₁, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    delta: Vec<f64>,
}

impl Perturbation {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if delta.is_empty() || !delta.len().is_multiple_of(2) {
            return Err(invalid(format!(
                "perturbation length {} is not 2d",
                delta.len()
            )));
        }
        if delta.iter().any(|&x| x != 1.0 && x != -1.0) {
            return Err(invalid("perturbation entries must be exactly ±1"));
        }
        Ok(Self { delta })
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let delta = (0..2 * dim)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        Self { delta }
    }

    pub fn entries(&self) -> &[f64] {
        &self.delta
    }

    pub fn dim(&self) -> usize {
        self.delta.len() / 2
    }

    /// The direction as a complex amplitude vector.
    pub fn as_complex(&self) -> DVector<Complex64> {
        DVector::from_iterator(
            self.dim(),
            self.delta.chunks_exact(2).map(|p| c(p[0], p[1])),
        )
    }
}

/// `normalize(φ + step·Δ)`.
pub fn perturb(phi: &PureState, delta: &Perturbation, step: f64) -> Result<PureState> {
    if !step.is_finite() {
        return Err(invalid(format!("perturbation step {step} is not finite")));
    }
    if delta.dim() != phi.dim() {
        return Err(crate::Error::DimensionMismatch {
            expected: phi.dim(),
            actual: delta.dim(),
        });
    }
    let direction = delta.as_complex() * c(step, 0.0);
    PureState::from_vector(phi.amplitudes() + direction)
}

/// Two-sided difference quotient `(E₊ − E₋)/(2β)`.
pub fn gradient_estimate(e_plus: f64, e_minus: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("beta {beta} must be positive")));
    }
    Ok((e_plus - e_minus) / (2.0 * beta))
}

/// `φ_{k+1} = normalize(φ_k + α_k g_k Δ_k)`.
pub fn step(phi: &PureState, delta: &Perturbation, g: f64, alpha: f64) -> Result<PureState> {
    perturb(phi, delta, alpha * g)
}
