use serde::{Deserialize, Serialize};

use super::{c, DensityMatrix, PureState};
use crate::error::{invalid, Error, Result};

/// Bloch-sphere coordinates of a qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self { x, y, z };
        if v.norm() > 1.0 + 1e-10 {
            return Err(invalid(format!(
                "Bloch vector length {} exceeds 1",
                v.norm()
            )));
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn from_state(psi: &PureState) -> Result<Self> {
        if psi.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: psi.dim(),
            });
        }
        let a = psi.amplitudes()[0];
        let b = psi.amplitudes()[1];
        let cross = a.conj() * b;
        Ok(Self {
            x: 2.0 * cross.re,
            y: 2.0 * cross.im,
            z: a.norm_sqr() - b.norm_sqr(),
        })
    }

    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: rho.dim(),
            });
        }
        let m = rho.elements();
        Ok(Self {
            x: 2.0 * m[(1, 0)].re,
            y: 2.0 * m[(1, 0)].im,
            z: (m[(0, 0)] - m[(1, 1)]).re,
        })
    }

    /// Pure state on the sphere surface; requires unit length.
    pub fn to_state(&self) -> Result<PureState> {
        if (self.norm() - 1.0).abs() > 1e-9 {
            return Err(invalid(format!(
                "Bloch vector length {} is not 1; no pure state",
                self.norm()
            )));
        }
        let theta = self.z.clamp(-1.0, 1.0).acos();
        let phi = self.y.atan2(self.x);
        let (s, co) = (theta / 2.0).sin_cos();
        PureState::new(vec![c(co, 0.0), c(s * phi.cos(), s * phi.sin())])
    }
}
