//! Dense complex linear algebra over qubit registers.
//!
//! Qubit 0 is the most significant tensor factor: in a register with system
//! and bath qubits the system factors come first, so a basis index reads as
//! `system_bits · 2^bath + bath_bits`.
//!
//! Density matrices are vectorized by column stacking. Under that convention
//! `A·ρ·B` maps to `(Bᵀ ⊗ A)·vec(ρ)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Hermiticity tolerance for density matrices.
pub const TOL_HERMITIAN: f64 = 1e-10;
/// Unit-trace tolerance for density matrices.
pub const TOL_TRACE: f64 = 1e-10;
/// Most negative eigenvalue tolerated before a state is reported non-positive.
pub const TOL_POSITIVITY: f64 = 1e-8;

/// Largest register the dense layer supports.
pub const MAX_QUBITS: usize = 8;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// An ordered register of system qubits followed by bath qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitRegister {
    system_count: usize,
    bath_count: usize,
    labels: Vec<String>,
}

impl QubitRegister {
    pub fn new(system_count: usize, bath_count: usize) -> Result<Self> {
        if system_count == 0 {
            return Err(Error::InvalidRegister("at least one system qubit is required".into()));
        }
        if system_count + bath_count > MAX_QUBITS {
            return Err(Error::InvalidRegister(format!(
                "{} qubits exceeds the supported maximum of {MAX_QUBITS}",
                system_count + bath_count
            )));
        }
        let labels = (1..=system_count)
            .map(|i| format!("S{i}"))
            .chain((1..=bath_count).map(|i| format!("B{i}")))
            .collect();
        Ok(Self { system_count, bath_count, labels })
    }

    pub fn system(system_count: usize) -> Result<Self> {
        Self::new(system_count, 0)
    }

    pub fn system_count(&self) -> usize {
        self.system_count
    }

    pub fn bath_count(&self) -> usize {
        self.bath_count
    }

    pub fn len(&self) -> usize {
        self.system_count + self.bath_count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Hilbert-space dimension `2^(system + bath)`.
    pub fn dim(&self) -> usize {
        1 << self.len()
    }

    pub fn system_dim(&self) -> usize {
        1 << self.system_count
    }

    pub fn bath_dim(&self) -> usize {
        1 << self.bath_count
    }
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => CMatrix::identity(2, 2),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }
}

/// A tensor product of single-qubit Paulis, one letter per register position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self(letters)
    }

    /// `letter` on qubit `target`, identity elsewhere.
    pub fn single(len: usize, target: usize, letter: Pauli) -> Self {
        let mut letters = vec![Pauli::I; len];
        letters[target] = letter;
        Self(letters)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidParams(format!("invalid Pauli letter `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            let c = match p {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Matrix of a Pauli string on `register`.
pub fn pauli_string(spec: &PauliString, register: &QubitRegister) -> Result<CMatrix> {
    if spec.len() != register.len() {
        return Err(Error::DimensionMismatch { expected: register.len(), found: spec.len() });
    }
    Ok(pauli_matrix(spec))
}

/// Matrix of a Pauli string on as many qubits as it has letters.
pub fn pauli_matrix(spec: &PauliString) -> CMatrix {
    spec.letters()
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, p| kron(&acc, &p.matrix()))
}

/// Hilbert-Schmidt inner product `Tr(a†·b)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    // nalgebra storage is column-major, so the raw slice is already stacked.
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &CVector) -> Result<CMatrix> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() || n == 0 {
        return Err(Error::DimensionMismatch { expected: n * n, found: v.len() });
    }
    Ok(CMatrix::from_column_slice(n, n, v.as_slice()))
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Computational basis vector for `index` in dimension `dim`.
pub fn basis_ket(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = ONE;
    v
}

/// `|a⟩⟨b|`.
pub fn ket_bra(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// A Hermitian, unit-trace, positive semidefinite matrix on a register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    register: QubitRegister,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, and positivity.
    pub fn new(register: QubitRegister, matrix: CMatrix) -> Result<Self> {
        let rho = Self::from_parts_unchecked(register, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Checks only the shape; used for intermediate states of integrators.
    pub fn from_parts_unchecked(register: QubitRegister, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != register.dim() || matrix.ncols() != register.dim() {
            return Err(Error::DimensionMismatch { expected: register.dim(), found: matrix.nrows() });
        }
        Ok(Self { register, matrix })
    }

    pub fn pure(register: QubitRegister, ket: &CVector) -> Result<Self> {
        let norm = ket.norm();
        if (norm - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("ket has norm {norm}")));
        }
        Self::new(register, ket_bra(ket, ket))
    }

    /// `|index⟩⟨index|` in the computational basis.
    pub fn basis_state(register: QubitRegister, index: usize) -> Result<Self> {
        let ket = basis_ket(register.dim(), index);
        Self::pure(register, &ket)
    }

    /// `ρ_S ⊗ I/2^bath` for a system state.
    pub fn with_mixed_bath(system: &DensityMatrix, bath_count: usize) -> Result<Self> {
        let register = QubitRegister::new(system.register.system_count(), bath_count)?;
        let bath = CMatrix::identity(1 << bath_count, 1 << bath_count)
            * C64::new(1.0 / (1 << bath_count) as f64, 0.0);
        Self::new(register, kron(&system.matrix, &bath))
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermiticity_error(&self.matrix);
        if herm > TOL_HERMITIAN {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = self.matrix.trace();
        if (tr - ONE).norm() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = min_eigenvalue(&self.matrix);
        if min < -TOL_POSITIVITY {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn vectorize(&self) -> CVector {
        vectorize(&self.matrix)
    }

    pub fn devectorize(register: QubitRegister, v: &CVector) -> Result<Self> {
        Self::new(register, devectorize(v)?)
    }

    /// Reduced state of the system qubits.
    pub fn system_state(&self) -> CMatrix {
        partial_trace_bath(&self.matrix, self.register.system_dim(), self.register.bath_dim())
    }

    /// `⟨ψ|ρ_S|ψ⟩` for a system vector `ψ`.
    pub fn system_overlap(&self, psi: &CVector) -> f64 {
        let rs = self.system_state();
        (psi.adjoint() * rs * psi)[(0, 0)].re
    }

    /// `Tr(P·ρ_S)` for a system operator `P`.
    pub fn system_expectation(&self, op: &CMatrix) -> f64 {
        (op * self.system_state()).trace().re
    }
}

/// Traces out the trailing `bath_dim` factor.
pub fn partial_trace_bath(m: &CMatrix, system_dim: usize, bath_dim: usize) -> CMatrix {
    if bath_dim == 1 {
        return m.clone();
    }
    CMatrix::from_fn(system_dim, system_dim, |i, j| {
        (0..bath_dim).map(|b| m[(i * bath_dim + b, j * bath_dim + b)]).sum()
    })
}

/// Row-compressed operator used by the matrix-free generators, where the
/// dense superoperator would be too large to store.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseOperator {
    pub fn from_dense(m: &CMatrix) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter_map(|j| {
                        let v = m[(i, j)];
                        (v != ZERO).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Self { dim: m.nrows(), rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `A·m`.
    pub fn left_mul(&self, m: &CMatrix) -> CMatrix {
        let n = m.ncols();
        let mut out = CMatrix::zeros(self.dim, n);
        for col in 0..n {
            let src = m.column(col);
            for (i, row) in self.rows.iter().enumerate() {
                let mut acc = ZERO;
                for &(k, a) in row {
                    acc += a * src[k];
                }
                out[(i, col)] = acc;
            }
        }
        out
    }

    /// `m·A†`.
    pub fn right_mul_adjoint(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(m.nrows(), self.dim);
        for (j, row) in self.rows.iter().enumerate() {
            let mut dst = out.column_mut(j);
            for &(k, a) in row {
                let ac = a.conj();
                for i in 0..m.nrows() {
                    dst[i] += m[(i, k)] * ac;
                }
            }
        }
        out
    }

    /// `A·m·A†`.
    pub fn sandwich(&self, m: &CMatrix) -> CMatrix {
        self.right_mul_adjoint(&self.left_mul(m))
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn pauli() -> impl Strategy<Value = Pauli> {
        prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
    }

    fn cmatrix(n: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
            .prop_map(move |v| CMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| C64::new(a, b))))
    }

    proptest! {
        #[test]
        fn pauli_strings_are_involutions(letters in proptest::collection::vec(pauli(), 1..5)) {
            let p = pauli_matrix(&PauliString::new(letters));
            let n = p.nrows();
            prop_assert_eq!(&p * &p, CMatrix::identity(n, n));
        }

        #[test]
        fn vectorize_round_trip_and_linearity(a in cmatrix(4), b in cmatrix(4), s in -2.0f64..2.0, t in -2.0f64..2.0) {
            prop_assert_eq!(devectorize(&vectorize(&a)).unwrap(), a.clone());
            let (s, t) = (C64::new(s, 0.0), C64::new(0.0, t));
            let lhs = vectorize(&(&a * s + &b * t));
            let rhs = vectorize(&a) * s + vectorize(&b) * t;
            prop_assert!((lhs - rhs).norm() < 1e-13);
        }
    }
}
