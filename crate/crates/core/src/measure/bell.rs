use serde::{Deserialize, Serialize};

use crate::qcore::{c, PureState};

/// Post-selected polarization-entangled pair source.
///
/// Produces `(|H₁V₂⟩ + e^{iφ}|V₁H₂⟩)/√2` with `φ = 4(θ + ε)`, where `θ` is
/// the phase-plate HWP angle and `ε` the residual phase of the setup.
/// With `|H⟩ = |0⟩`, `|V⟩ = |1⟩` this is `(|01⟩ + e^{iφ}|10⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellSourceModel {
    pub theta_degrees: f64,
    pub epsilon_degrees: f64,
}

impl BellSourceModel {
    /// Source tuned to the singlet `|Ψ⁻⟩`.
    pub fn singlet() -> Self {
        Self {
            theta_degrees: 45.0,
            epsilon_degrees: 0.0,
        }
    }

    pub fn phase_degrees(&self) -> f64 {
        4.0 * (self.theta_degrees + self.epsilon_degrees)
    }
}

pub fn bell_state(source: &BellSourceModel) -> PureState {
    let (s, co) = source.phase_degrees().to_radians().sin_cos();
    PureState::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(co, s), c(0.0, 0.0)])
        .expect("two non-zero amplitudes")
}
