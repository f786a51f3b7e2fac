use std::fmt;

use serde::{Deserialize, Serialize};

use super::{c, clamp_to_range, kron, Complex64, DensityMatrix, Operator, PureState};
use crate::error::{invalid, Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Single-qubit Pauli factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL
            .get(index)
            .copied()
            .ok_or_else(|| invalid(format!("Pauli index {index} out of range")))
    }

    pub fn matrix(self) -> Operator {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let i = c(0.0, 1.0);
        let entries = match self {
            Pauli::I => [one, z, z, one],
            Pauli::X => [z, one, one, z],
            Pauli::Y => [z, -i, i, z],
            Pauli::Z => [one, z, z, -one],
        };
        Operator::from_row_slice(2, 2, &entries)
    }

    /// Eigenvectors for eigenvalues +1 and −1, in that order.
    ///
    /// The identity is measured in the Z basis; both outcomes then carry
    /// eigenvalue +1 (see [`Pauli::eigenvalues`]).
    pub fn eigenbasis(self) -> (PureState, PureState) {
        let s = FRAC_1_SQRT_2;
        let (plus, minus) = match self {
            Pauli::X => ([c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]),
            Pauli::Y => ([c(s, 0.0), c(0.0, s)], [c(s, 0.0), c(0.0, -s)]),
            Pauli::I | Pauli::Z => ([c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]),
        };
        (
            PureState::new(plus.to_vec()).expect("unit vector"),
            PureState::new(minus.to_vec()).expect("unit vector"),
        )
    }

    /// Eigenvalues attached to the two outcomes of [`Pauli::eigenbasis`].
    pub fn eigenvalues(self) -> [f64; 2] {
        match self {
            Pauli::I => [1.0, 1.0],
            _ => [1.0, -1.0],
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, most significant qubit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    factors: Vec<Pauli>,
}

impl PauliOp {
    pub fn new(factors: Vec<Pauli>) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("Pauli operator needs at least one factor"));
        }
        Ok(Self { factors })
    }

    /// Operator with base-4 digits of `index` as factors; `(i, j)` ↦ `4i + j`.
    pub fn from_index(index: usize, n_qubits: usize) -> Result<Self> {
        let count = 4usize.pow(n_qubits as u32);
        if n_qubits == 0 || index >= count {
            return Err(invalid(format!(
                "Pauli index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut factors = vec![Pauli::I; n_qubits];
        let mut rest = index;
        for slot in factors.iter_mut().rev() {
            *slot = Pauli::ALL[rest % 4];
            rest /= 4;
        }
        Ok(Self { factors })
    }

    /// All `4^n` Pauli operators in index order.
    pub fn all(n_qubits: usize) -> Vec<PauliOp> {
        (0..4usize.pow(n_qubits as u32))
            .map(|i| Self::from_index(i, n_qubits).expect("index in range"))
            .collect()
    }

    pub fn index(&self) -> usize {
        self.factors.iter().fold(0, |acc, p| acc * 4 + p.index())
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|p| *p == Pauli::I)
    }

    pub fn matrix(&self) -> Operator {
        self.factors
            .iter()
            .skip(1)
            .fold(self.factors[0].matrix(), |acc, p| kron(&acc, &p.matrix()))
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.factors {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

/// `Tr(ρP)`.
pub fn pauli_expectation(rho: &DensityMatrix, op: &PauliOp) -> Result<f64> {
    if rho.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: op.dim(),
        });
    }
    let tr: Complex64 = (rho.elements() * op.matrix()).trace();
    if tr.im.abs() >= 1e-10 {
        return Err(invalid(format!("Tr(ρP) has imaginary part {:e}", tr.im)));
    }
    clamp_to_range(tr.re, -1.0, 1.0)
}

/// `table[i][j] = ¼⟨Φ|Pᵢ⊗Pⱼ|Φ⟩`.
pub type PauliTable = [[f64; 4]; 4];

pub fn pauli_table(psi: &PureState) -> Result<PauliTable> {
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: psi.dim(),
        });
    }
    let mut table = [[0.0; 4]; 4];
    for (i, row) in table.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let op = PauliOp::new(vec![Pauli::ALL[i], Pauli::ALL[j]])?;
            let v = psi.expectation_of(&op.matrix())?.re;
            *cell = 0.25 * clamp_to_range(v, -1.0, 1.0)?;
        }
    }
    Ok(table)
}
