use nalgebra::DVector;

use super::set::{CountVector, TomographySet};
use crate::error::{invalid, Result};
use crate::qcore::{c, hermitian_eigen, DensityMatrix, Operator, PauliOp};

/// Least-squares Born-rule inversion in the Pauli basis.
///
/// Solves `f_i = Σ_j ⟨ψ_i|P_j|ψ_i⟩ r_j / d` for the Pauli coordinates `r` and
/// returns `Σ_j r_j P_j / d` rescaled to unit trace. The result is
/// Hermitian but may have negative eigenvalues.
pub fn linear_inversion(counts: &CountVector, set: &TomographySet) -> Result<Operator> {
    counts.check_len(set)?;
    let f = DVector::from_vec(counts.frequencies());
    let svd = set.design().clone().svd(true, true);
    let r = svd
        .solve(&f, 1e-12)
        .map_err(|e| invalid(format!("least-squares solve failed: {e}")))?;
    let d = set.dim();
    let mut rho = Operator::zeros(d, d);
    for (j, op) in PauliOp::all(set.n_qubits()).iter().enumerate() {
        rho += op.matrix() * c(r[j] / d as f64, 0.0);
    }
    let trace = rho.trace().re;
    if trace.abs() < 1e-12 {
        return Err(invalid("linear inversion produced a traceless operator"));
    }
    Ok(rho * c(1.0 / trace, 0.0))
}

/// Clips negative eigenvalues of a unit-trace Hermitian operator to zero
/// and renormalizes.
pub fn project_to_physical(op: &Operator) -> Result<DensityMatrix> {
    let (values, vectors) = hermitian_eigen(op);
    let clipped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(invalid("operator has no positive eigenvalue"));
    }
    let d = op.nrows();
    let mut rho = Operator::zeros(d, d);
    for (k, &lambda) in clipped.iter().enumerate() {
        if lambda == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        rho += (v * v.adjoint()) * c(lambda / total, 0.0);
    }
    Ok(DensityMatrix::from_trusted(rho))
}
