//! Jones calculus for the analysis optics.
//!
//! A projective polarization measurement is a quarter-wave plate, then a
//! half-wave plate, then a polarizing beam splitter whose transmitted port
//! is `|H⟩` and reflected port `|V⟩`. Angles are fast-axis angles from
//! horizontal, in degrees. Matrices are defined up to a global phase.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{c, Operator, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlateKind {
    HalfWave,
    QuarterWave,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JonesMatrix {
    pub kind: PlateKind,
    pub angle_degrees: f64,
    matrix: Operator,
}

impl JonesMatrix {
    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        if state.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: state.dim(),
            });
        }
        PureState::from_vector(&self.matrix * state.amplitudes())
    }

    /// Largest entry of `J†J − I`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.matrix.adjoint() * &self.matrix - Operator::identity(2, 2);
        prod.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Jones matrix of an ideal wave plate with its fast axis at `theta_degrees`.
///
/// The half-wave plate has eigenvalues `+1` (along the fast axis) and `−1`;
/// the quarter-wave plate has `1` and `i`.
pub fn jones_matrix(kind: PlateKind, theta_degrees: f64) -> JonesMatrix {
    let theta = theta_degrees.to_radians();
    let matrix = match kind {
        PlateKind::HalfWave => {
            let (s2, c2) = (2.0 * theta).sin_cos();
            Operator::from_row_slice(2, 2, &[c(c2, 0.0), c(s2, 0.0), c(s2, 0.0), c(-c2, 0.0)])
        }
        PlateKind::QuarterWave => {
            let (s, co) = theta.sin_cos();
            let off = c(s * co, -s * co);
            Operator::from_row_slice(2, 2, &[c(co * co, s * s), off, off, c(s * s, co * co)])
        }
    };
    JonesMatrix {
        kind,
        angle_degrees: theta_degrees,
        matrix,
    }
}

/// Analysis waveplate angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveplateSetting {
    pub qwp_degrees: f64,
    pub hwp_degrees: f64,
}

impl WaveplateSetting {
    pub fn offset(&self, qwp: f64, hwp: f64) -> Self {
        Self {
            qwp_degrees: self.qwp_degrees + qwp,
            hwp_degrees: self.hwp_degrees + hwp,
        }
    }

    /// Combined transform `HWP(h)·QWP(q)` seen by the incoming photon.
    pub fn transform(&self) -> Operator {
        jones_matrix(PlateKind::HalfWave, self.hwp_degrees).matrix()
            * jones_matrix(PlateKind::QuarterWave, self.qwp_degrees).matrix()
    }

    /// States projected onto by the transmitted and reflected ports.
    pub fn analysis_basis(&self) -> (PureState, PureState) {
        let back = self.transform().adjoint();
        let h = back.column(0).into_owned();
        let v = back.column(1).into_owned();
        (
            PureState::from_vector(h).expect("unitary column"),
            PureState::from_vector(v).expect("unitary column"),
        )
    }
}

/// Waveplate angles whose transmitted port projects onto `psi`.
///
/// The QWP fast axis is aligned with the polarization ellipse, which turns
/// the state linear; the HWP then rotates that linear polarization onto
/// horizontal.
pub fn projector_to_waveplate_angles(psi: &PureState) -> Result<WaveplateSetting> {
    if psi.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: psi.dim(),
        });
    }
    let a = psi.amplitudes()[0];
    let b = psi.amplitudes()[1];
    let s1 = a.norm_sqr() - b.norm_sqr();
    let s2 = 2.0 * (a.conj() * b).re;
    let qwp_degrees = 0.5 * s2.atan2(s1).to_degrees();

    let linear = jones_matrix(PlateKind::QuarterWave, qwp_degrees).matrix() * psi.amplitudes();
    let pivot = if linear[0].norm() >= linear[1].norm() {
        linear[0]
    } else {
        linear[1]
    };
    let dephase = pivot.conj() / pivot.norm();
    let (h, v) = (linear[0] * dephase, linear[1] * dephase);
    let chi = v.re.atan2(h.re).to_degrees();
    Ok(WaveplateSetting {
        qwp_degrees,
        hwp_degrees: 0.5 * chi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h() -> PureState {
        PureState::basis(1, 0).unwrap()
    }

    fn v() -> PureState {
        PureState::basis(1, 1).unwrap()
    }

    fn d() -> PureState {
        PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn hwp_at_22_5_makes_diagonal() {
        let out = jones_matrix(PlateKind::HalfWave, 22.5).apply(&h()).unwrap();
        assert!((out.fidelity(&d()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hwp_at_zero_flips_vertical_sign() {
        let m = jones_matrix(PlateKind::HalfWave, 0.0);
        let out = m.matrix() * v().amplitudes();
        assert!((out + v().amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn eigenstructure() {
        for theta in [0.0f64, 13.0, 45.0, 100.0] {
            let axis = PureState::new(vec![
                c(theta.to_radians().cos(), 0.0),
                c(theta.to_radians().sin(), 0.0),
            ])
            .unwrap();
            let hwp = jones_matrix(PlateKind::HalfWave, theta);
            let qwp = jones_matrix(PlateKind::QuarterWave, theta);
            assert!((hwp.matrix() * axis.amplitudes() - axis.amplitudes()).norm() < 1e-12);
            assert!((qwp.matrix() * axis.amplitudes() - axis.amplitudes()).norm() < 1e-12);
            let sq = hwp.matrix() * hwp.matrix();
            assert!((sq - Operator::identity(2, 2)).norm() < 1e-12);
            let det = qwp.matrix()[(0, 0)] * qwp.matrix()[(1, 1)]
                - qwp.matrix()[(0, 1)] * qwp.matrix()[(1, 0)];
            assert!((det - c(0.0, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_plate_gives_four_theta() {
        // QWP(45)·HWP(θ)·QWP(45) on |D⟩ leaves equal H/V weights with relative
        // phase linear in θ at slope 4
        let phase = |theta: f64| {
            let q = jones_matrix(PlateKind::QuarterWave, 45.0);
            let hw = jones_matrix(PlateKind::HalfWave, theta);
            let m = q.matrix() * hw.matrix() * q.matrix();
            let out = m * d().amplitudes();
            assert!((out[0].norm() - out[1].norm()).abs() < 1e-12);
            out[1] / out[0]
        };
        for theta in [0.0, 7.0, 20.0, 33.0] {
            let step = 1e-4;
            let slope =
                (phase(theta + step) / phase(theta - step)).arg() / (2.0 * step.to_radians());
            assert!((slope - 4.0).abs() < 1e-6, "slope {slope}");
        }
    }

    #[test]
    fn horizontal_needs_no_rotation() {
        let s = projector_to_waveplate_angles(&h()).unwrap();
        assert_eq!(s.qwp_degrees, 0.0);
        assert_eq!(s.hwp_degrees, 0.0);
    }

    #[test]
    fn diagonal_round_trip() {
        let s = projector_to_waveplate_angles(&d()).unwrap();
        let (t, r) = s.analysis_basis();
        let p = t.projector() - d().projector();
        assert!(p.norm() < 1e-10);
        assert!(r.fidelity(&d()).unwrap() < 1e-12);
    }

    #[test]
    fn haar_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let psi = PureState::haar_random(1, &mut rng);
            let s = projector_to_waveplate_angles(&psi).unwrap();
            let (t, _) = s.analysis_basis();
            assert!((t.fidelity(&psi).unwrap() - 1.0).abs() < 1e-9);
            // the physical direction: the optics send ψ to the H port
            let out = PureState::from_vector(s.transform() * psi.amplitudes()).unwrap();
            assert!((out.fidelity(&h()).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn plates_are_unitary(theta in -360.0f64..360.0) {
            prop_assert!(jones_matrix(PlateKind::HalfWave, theta).unitarity_defect() < 1e-12);
            prop_assert!(jones_matrix(PlateKind::QuarterWave, theta).unitarity_defect() < 1e-12);
        }
    }
}
