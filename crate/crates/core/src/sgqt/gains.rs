use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// SPSA gain sequences `α_k = a/(k+1+A)^s` and `β_k = b/(k+1)^t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSchedule {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "big_a")]
    pub stability: f64,
    pub s: f64,
    pub t: f64,
}

impl Default for GainSchedule {
    fn default() -> Self {
        Self::standard()
    }
}

impl GainSchedule {
    pub fn new(a: f64, b: f64, stability: f64, s: f64, t: f64) -> Result<Self> {
        let g = Self {
            a,
            b,
            stability,
            s,
            t,
        };
        g.validate()?;
        Ok(g)
    }

    /// `a = 3, b = 0.1, A = 0, s = 0.602, t = 0.101`.
    pub fn standard() -> Self {
        Self {
            a: 3.0,
            b: 0.1,
            stability: 0.0,
            s: 0.602,
            t: 0.101,
        }
    }

    /// Standard constants with the asymptotically optimal exponents `s = 1`, `t = 1/6`.
    pub fn asymptotic() -> Self {
        Self {
            s: 1.0,
            t: 1.0 / 6.0,
            ..Self::standard()
        }
    }

    /// Offline-tuned constants for shot-noise or waveplate-error limited
    /// one-qubit runs.
    pub fn noisy_single_qubit() -> Self {
        Self {
            a: 0.5,
            b: 0.5,
            ..Self::standard()
        }
    }

    /// Offline-tuned constants for the two-qubit partial-fidelity objective.
    pub fn two_qubit() -> Self {
        Self {
            a: 0.5,
            b: 0.2,
            ..Self::standard()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.stability, self.s, self.t]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(invalid("gain constants must be finite"));
        }
        if self.a <= 0.0 || self.b <= 0.0 {
            return Err(invalid(format!(
                "gains need a > 0 and b > 0 (a={}, b={})",
                self.a, self.b
            )));
        }
        if self.stability < 0.0 {
            return Err(invalid(format!(
                "stability constant A={} must be ≥ 0",
                self.stability
            )));
        }
        if !(0.0 < self.t && self.t < self.s && self.s <= 1.0) {
            return Err(invalid(format!(
                "exponents need 0 < t < s ≤ 1 (s={}, t={})",
                self.s, self.t
            )));
        }
        Ok(())
    }

    pub fn alpha(&self, k: usize) -> f64 {
        self.a / (k as f64 + 1.0 + self.stability).powf(self.s)
    }

    pub fn beta(&self, k: usize) -> f64 {
        self.b / (k as f64 + 1.0).powf(self.t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GainSchedule::standard().validate().is_ok());
        assert!(GainSchedule::asymptotic().validate().is_ok());
        assert!(GainSchedule::noisy_single_qubit().validate().is_ok());
        assert!(GainSchedule::two_qubit().validate().is_ok());
        assert!(GainSchedule::new(0.0, 0.1, 0.0, 0.602, 0.101).is_err());
        assert!(GainSchedule::new(3.0, 0.1, -1.0, 0.602, 0.101).is_err());
        assert!(GainSchedule::new(3.0, 0.1, 0.0, 0.1, 0.2).is_err());
        assert!(GainSchedule::new(3.0, 0.1, 0.0, 1.2, 0.1).is_err());
    }

    #[test]
    fn strictly_decreasing() {
        for g in [GainSchedule::standard(), GainSchedule::asymptotic()] {
            for k in 0..500 {
                assert!(g.alpha(k + 1) < g.alpha(k));
                assert!(g.beta(k + 1) < g.beta(k));
            }
        }
    }

    #[test]
    fn stability_shifts_alpha_only() {
        let g = GainSchedule::new(3.0, 0.1, 10.0, 0.602, 0.101).unwrap();
        assert!((g.alpha(0) - 3.0 / 11f64.powf(0.602)).abs() < 1e-15);
        assert_eq!(g.beta(0), 0.1);
    }
}
