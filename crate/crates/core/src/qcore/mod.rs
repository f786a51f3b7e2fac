//! Exact dense linear algebra for one- and two-qubit states.
//!
//! Everything here is a plain value type: pure states, density matrices,
//! Pauli operators and Bloch vectors. Matrices are dense complex `f64`;
//! the largest object in this crate is a 4×4 density matrix, so there is
//! no sparse or structured storage.
//!
//! Fidelities and state comparisons are phase-invariant. No canonical
//! global phase is ever imposed on a [`PureState`].

mod bloch;
mod pauli;
mod state;

pub use bloch::BlochVector;
pub use pauli::{pauli_expectation, pauli_table, Pauli, PauliOp, PauliTable};
pub use state::{expectation, fidelity, fidelity_of_operators, kron, DensityMatrix, PureState};

use crate::error::{invalid, Result};
use nalgebra::{Complex, DMatrix};

pub type Complex64 = Complex<f64>;

/// Dense complex operator on the state space.
pub type Operator = DMatrix<Complex64>;

/// Largest floating-point excess that is silently clamped back into range.
pub const ROUNDOFF_TOLERANCE: f64 = 1e-9;

/// Clamp `x` into `[lo, hi]` when it is outside by roundoff only.
pub fn clamp_to_range(x: f64, lo: f64, hi: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(invalid(format!("non-finite value {x}")));
    }
    if x < lo - ROUNDOFF_TOLERANCE || x > hi + ROUNDOFF_TOLERANCE {
        return Err(invalid(format!(
            "value {x} outside [{lo}, {hi}] beyond roundoff tolerance"
        )));
    }
    Ok(x.clamp(lo, hi))
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex::new(re, im)
}

/// Number of qubits for a power-of-two dimension.
pub(crate) fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(invalid(format!(
            "dimension {dim} is not a power of two ≥ 2"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Hermitian part `(m + m†)/2`.
pub(crate) fn hermitian_part(m: &Operator) -> Operator {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Largest entry of `m - m†` in modulus.
pub(crate) fn hermiticity_defect(m: &Operator) -> f64 {
    let adj = m.adjoint();
    m.iter()
        .zip(adj.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub(crate) fn hermitian_eigen(m: &Operator) -> (Vec<f64>, Operator) {
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Operator::from_fn(m.nrows(), m.ncols(), |r, col| {
        eig.eigenvectors[(r, order[col])]
    });
    (values, vectors)
}
