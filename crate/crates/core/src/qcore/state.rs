use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{
    c, clamp_to_range, hermitian_eigen, hermitian_part, hermiticity_defect, qubits_for_dim,
    Complex64, Operator,
};
use crate::error::{invalid, Error, Result};

const PHYSICAL_TOLERANCE: f64 = 1e-10;
const ZERO_NORM: f64 = 1e-14;

/// A normalized pure state over `2^n` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
}

impl PureState {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amplitudes))
    }

    pub fn from_vector(amplitudes: DVector<Complex64>) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm < ZERO_NORM {
            return Err(Error::DegeneratePerturbation { norm });
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    /// Computational basis state `|index⟩` on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if n_qubits == 0 || index >= dim {
            return Err(invalid(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = DVector::zeros(dim);
        amps[index] = c(1.0, 0.0);
        Ok(Self { amplitudes: amps })
    }

    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Haar-random pure state from normalized complex Gaussian amplitudes.
    pub fn haar_random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let dim = 1usize << n_qubits;
        loop {
            let amps = DVector::from_fn(dim, |_, _| {
                c(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            if let Ok(state) = Self::from_vector(amps) {
                return state;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &PureState) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|²`, independent of either global phase.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        clamp_to_range(self.overlap(other)?.norm_sqr(), 0.0, 1.0)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    /// `⟨ψ|A|ψ⟩` for an arbitrary operator.
    pub fn expectation_of(&self, op: &Operator) -> Result<Complex64> {
        check_dim(op.nrows(), self.dim())?;
        Ok(self.amplitudes.dotc(&(op * &self.amplitudes)))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> Operator {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix {
            elements: self.projector(),
        }
    }

    /// Splits a two-qubit product state into its single-qubit factors.
    ///
    /// Returns `None` when the state is entangled (Schmidt rank > 1).
    pub fn factor_product(&self) -> Option<(PureState, PureState)> {
        if self.dim() != 4 {
            return None;
        }
        let a = &self.amplitudes;
        if (a[0] * a[3] - a[1] * a[2]).norm() > 1e-9 {
            return None;
        }
        // rows of the 2×2 reshaping are multiples of the second factor
        let row0 = DVector::from_vec(vec![a[0], a[1]]);
        let row1 = DVector::from_vec(vec![a[2], a[3]]);
        let second = if row0.norm() >= row1.norm() {
            row0
        } else {
            row1
        };
        let second = PureState::from_vector(second).ok()?;
        let b = &second.amplitudes;
        let first = DVector::from_vec(vec![
            b.dotc(&DVector::from_vec(vec![a[0], a[1]])),
            b.dotc(&DVector::from_vec(vec![a[2], a[3]])),
        ]);
        let first = PureState::from_vector(first).ok()?;
        Some((first, second))
    }
}

/// A physical density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elements: Operator,
}

impl DensityMatrix {
    /// Validates and wraps `elements`.
    pub fn new(elements: Operator) -> Result<Self> {
        validate_physical(&elements)?;
        Ok(Self {
            elements: hermitian_part(&elements),
        })
    }

    pub fn from_pure(state: &PureState) -> Self {
        state.density_matrix()
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(invalid("need at least one qubit"));
        }
        let dim = 1usize << n_qubits;
        Ok(Self {
            elements: Operator::identity(dim, dim) * c(1.0 / dim as f64, 0.0),
        })
    }

    /// Convex combination `Σ wᵢ ρᵢ` of states with weights summing to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| invalid("empty mixture"))?;
        let dim = first.1.dim();
        let mut acc = Operator::zeros(dim, dim);
        for (w, rho) in parts {
            check_dim(dim, rho.dim())?;
            if *w < 0.0 {
                return Err(invalid("negative mixture weight"));
            }
            acc += &rho.elements * c(*w, 0.0);
        }
        Self::new(acc)
    }

    /// Wraps a matrix already known to be physical up to roundoff.
    pub(crate) fn from_trusted(elements: Operator) -> Self {
        Self {
            elements: hermitian_part(&elements),
        }
    }

    pub fn elements(&self) -> &Operator {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.elements).0
    }

    pub fn trace(&self) -> f64 {
        self.elements.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.elements * &self.elements).trace().re
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

fn validate_physical(m: &Operator) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(invalid("density matrix must be square"));
    }
    qubits_for_dim(m.nrows())?;
    let defect = hermiticity_defect(m);
    if defect > PHYSICAL_TOLERANCE {
        return Err(invalid(format!("matrix not Hermitian (defect {defect:e})")));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > PHYSICAL_TOLERANCE || tr.im.abs() > PHYSICAL_TOLERANCE {
        return Err(invalid(format!("trace {tr} is not 1")));
    }
    validate_psd(m)
}

fn validate_psd(m: &Operator) -> Result<()> {
    let (values, _) = hermitian_eigen(m);
    if let Some(&min) = values.first() {
        if min < -PHYSICAL_TOLERANCE {
            return Err(invalid(format!("matrix has negative eigenvalue {min:e}")));
        }
    }
    Ok(())
}

/// Born probability `⟨ψ|ρ|ψ⟩`.
pub fn expectation(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    check_dim(rho.dim(), psi.dim())?;
    let v = psi.expectation_of(&rho.elements)?;
    clamp_to_range(v.re, 0.0, 1.0)
}

/// Uhlmann fidelity `(Tr √(√a b √a))²`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    fidelity_of_operators(&a.elements, &b.elements)
}

/// Uhlmann fidelity on raw operators; rejects non-PSD input.
pub fn fidelity_of_operators(a: &Operator, b: &Operator) -> Result<f64> {
    check_dim(a.nrows(), b.nrows())?;
    validate_psd(a)?;
    validate_psd(b)?;
    // a rank-one argument reduces to ⟨φ|b|φ⟩; this avoids √ of roundoff eigenvalues
    if let Some(phi) = pure_component(a) {
        return clamp_to_range(phi.expectation_of(b)?.re, 0.0, 1.0);
    }
    if let Some(phi) = pure_component(b) {
        return clamp_to_range(phi.expectation_of(a)?.re, 0.0, 1.0);
    }
    let product = psd_sqrt(a) * psd_sqrt(b);
    let root_sum: f64 = product.singular_values().iter().sum();
    clamp_to_range(root_sum * root_sum, 0.0, 1.0)
}

/// Dominant eigenvector when `m` is a unit-trace projector.
fn pure_component(m: &Operator) -> Option<PureState> {
    let tr = m.trace().re;
    let purity = (m * m).trace().re;
    if (tr - 1.0).abs() > 1e-10 || (purity - 1.0).abs() > 1e-12 {
        return None;
    }
    let (_, vectors) = hermitian_eigen(m);
    PureState::from_vector(vectors.column(m.ncols() - 1).into_owned()).ok()
}

fn psd_sqrt(m: &Operator) -> Operator {
    let (values, vectors) = hermitian_eigen(m);
    let n = m.nrows();
    let diag = Operator::from_fn(n, n, |i, j| {
        if i == j {
            c(values[i].max(0.0).sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    &vectors * diag * vectors.adjoint()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}
