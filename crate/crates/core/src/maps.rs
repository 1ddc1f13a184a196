//! Superoperators for noise, correction and their combination.
//!
//! Dense superoperators act on column-stacked density matrices. Registers
//! whose Hilbert dimension exceeds [`DENSE_HILBERT_LIMIT`] (the six-qubit
//! system–bath model) are handled by [`MatrixFreeGenerator`], which applies
//! `ρ ↦ −i[H,ρ] + κ(Φ(ρ) − ρ)` through left and right multiplications.

use std::sync::OnceLock;

use crate::codes::{CodeKind, CodeSpec};
use crate::error::{Error, Result};
use crate::tensor::{
    hermiticity_error, kron, pauli_matrix, vectorize, CMatrix, DensityMatrix, Pauli, PauliString,
    QubitRegister, SparseOperator, C64, I,
};

/// Largest Hilbert dimension for which superoperators are materialized.
pub const DENSE_HILBERT_LIMIT: usize = 16;

const HERMITIAN_OPERATOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// Generator of a dynamical semigroup: output is traceless.
    Generator,
    /// Completely positive trace-preserving map.
    Channel,
}

/// A linear map on vectorized density matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    matrix: CMatrix,
    kind: MapKind,
    hilbert_dim: usize,
    // Built on first use; generators of the small codes are mostly zeros.
    sparse: OnceLock<SparseOperator>,
}

impl PartialEq for Superoperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix && self.kind == other.kind && self.hilbert_dim == other.hilbert_dim
    }
}

impl Superoperator {
    fn build(matrix: CMatrix, kind: MapKind, hilbert_dim: usize) -> Self {
        Self { matrix, kind, hilbert_dim, sparse: OnceLock::new() }
    }

    pub fn from_matrix(matrix: CMatrix, kind: MapKind) -> Result<Self> {
        let n = matrix.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if matrix.ncols() != n || d * d != n {
            return Err(Error::DimensionMismatch { expected: d * d, found: n });
        }
        Ok(Self::build(matrix, kind, d))
    }

    pub fn identity(hilbert_dim: usize) -> Self {
        let n = hilbert_dim * hilbert_dim;
        Self::build(CMatrix::identity(n, n), MapKind::Channel, hilbert_dim)
    }

    pub fn zero(hilbert_dim: usize) -> Self {
        let n = hilbert_dim * hilbert_dim;
        Self::build(CMatrix::zeros(n, n), MapKind::Generator, hilbert_dim)
    }

    /// `ρ ↦ Σ_i K_i ρ K_i†`.
    pub fn from_kraus(kraus: &[CMatrix]) -> Result<Self> {
        let d = kraus.first().map(|k| k.nrows()).ok_or_else(|| {
            Error::InvalidParams("at least one Kraus operator is required".into())
        })?;
        let mut m = CMatrix::zeros(d * d, d * d);
        for k in kraus {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: k.nrows() });
            }
            m += kron(&k.map(|z| z.conj()), k);
        }
        Ok(Self::build(m, MapKind::Channel, d))
    }

    /// `ρ ↦ A·ρ`.
    pub fn left(a: &CMatrix) -> CMatrix {
        let d = a.nrows();
        kron(&CMatrix::identity(d, d), a)
    }

    /// `ρ ↦ ρ·B`.
    pub fn right(b: &CMatrix) -> CMatrix {
        let d = b.nrows();
        kron(&b.transpose(), &CMatrix::identity(d, d))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    /// Dimension of the vectorized space (`d²`).
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        debug_assert_eq!(rho.nrows(), self.hilbert_dim);
        let d = self.hilbert_dim;
        let sparse = self.sparse.get_or_init(|| SparseOperator::from_dense(&self.matrix));
        if 4 * sparse.nnz() < self.matrix.len() {
            // Column-major storage of ρ is already vec(ρ).
            let v = sparse.left_mul(&CMatrix::from_column_slice(d * d, 1, rho.as_slice()));
            return CMatrix::from_column_slice(d, d, v.as_slice());
        }
        let v = &self.matrix * vectorize(rho);
        CMatrix::from_column_slice(d, d, v.as_slice())
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<CMatrix> {
        if rho.dim() != self.hilbert_dim {
            return Err(Error::DimensionMismatch { expected: self.hilbert_dim, found: rho.dim() });
        }
        Ok(self.apply(rho.matrix()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        self.check_same_dim(other)?;
        let kind = match (self.kind, other.kind) {
            (MapKind::Channel, MapKind::Channel) => MapKind::Channel,
            _ => MapKind::Generator,
        };
        Ok(Self::build(&self.matrix * &other.matrix, kind, self.hilbert_dim))
    }

    /// `a·self + b·other`, tagged with `kind`.
    pub fn combine(&self, a: f64, other: &Superoperator, b: f64, kind: MapKind) -> Result<Self> {
        self.check_same_dim(other)?;
        let matrix = &self.matrix * C64::new(a, 0.0) + &other.matrix * C64::new(b, 0.0);
        Ok(Self::build(matrix, kind, self.hilbert_dim))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::build(&self.matrix * C64::new(s, 0.0), self.kind, self.hilbert_dim)
    }

    /// `|Tr(output)|` for generators, `|Tr(output) − Tr(input)|` for channels.
    pub fn trace_defect(&self, rho: &CMatrix) -> f64 {
        let out = self.apply(rho).trace();
        match self.kind {
            MapKind::Generator => out.norm(),
            MapKind::Channel => (out - rho.trace()).norm(),
        }
    }

    fn check_same_dim(&self, other: &Superoperator) -> Result<()> {
        if self.hilbert_dim != other.hilbert_dim {
            return Err(Error::DimensionMismatch { expected: self.hilbert_dim, found: other.hilbert_dim });
        }
        Ok(())
    }
}

/// Anything that can drive `dρ/dt = G(ρ)`.
pub trait Generator: Send + Sync {
    fn hilbert_dim(&self) -> usize;

    fn apply(&self, rho: &CMatrix) -> CMatrix;

    /// Error-correction rate κ, used to cap integrator steps.
    fn correction_rate(&self) -> f64 {
        0.0
    }

    /// The materialized superoperator, when there is one.
    fn dense(&self) -> Option<&Superoperator> {
        None
    }
}

impl Generator for Superoperator {
    fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        Superoperator::apply(self, rho)
    }

    fn dense(&self) -> Option<&Superoperator> {
        Some(self)
    }
}

fn check_hermitian(h: &CMatrix) -> Result<()> {
    let scale = h.norm().max(1.0);
    let dev = hermiticity_error(h);
    if dev > HERMITIAN_OPERATOR_TOL * scale {
        return Err(Error::NonHermitian(dev));
    }
    Ok(())
}

/// `ρ ↦ −i[H, ρ]`.
pub fn hamiltonian_generator(h: &CMatrix) -> Result<Superoperator> {
    check_hermitian(h)?;
    let m = (Superoperator::left(h) - Superoperator::right(h)) * (-I);
    Superoperator::from_matrix(m, MapKind::Generator)
}

/// `ρ ↦ −i[H,ρ] + ½ Σ_j λ_j (2 L_j ρ L_j† − L_j†L_j ρ − ρ L_j†L_j)`.
pub fn lindblad_generator(h: &CMatrix, jump_ops: &[(CMatrix, f64)]) -> Result<Superoperator> {
    let mut gen = hamiltonian_generator(h)?;
    let d = h.nrows();
    for (l, rate) in jump_ops {
        if l.nrows() != d || l.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: l.nrows() });
        }
        if *rate < 0.0 {
            return Err(Error::OutOfRange { name: "lindblad rate", value: *rate });
        }
        let ldl = l.adjoint() * l;
        let dissipator = kron(&l.map(|z| z.conj()), l) * C64::new(2.0, 0.0)
            - Superoperator::left(&ldl)
            - Superoperator::right(&ldl);
        gen.matrix += dissipator * C64::new(0.5 * rate, 0.0);
    }
    Ok(gen)
}

/// Independent bit flips at rate λ on each of `n` qubits: `Σ_j λ(X_j ρ X_j − ρ)`.
pub fn bitflip_lindblad(n: usize, lambda: f64) -> Result<Superoperator> {
    let d = 1 << n;
    let jumps: Vec<(CMatrix, f64)> = (0..n)
        .map(|j| (pauli_matrix(&PauliString::single(n, j, Pauli::X)), lambda))
        .collect();
    lindblad_generator(&CMatrix::zeros(d, d), &jumps)
}

/// Full error-correcting channel `Φ(ρ) = Σ K_i ρ K_i†`.
pub fn strong_map(code: &CodeSpec) -> Superoperator {
    Superoperator::from_kraus(&code.kraus).expect("code Kraus operators share one dimension")
}

/// `(1 − ε)·id + ε·Φ`.
pub fn weak_map(code: &CodeSpec, epsilon: f64) -> Result<Superoperator> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::OutOfRange { name: "epsilon", value: epsilon });
    }
    let phi = strong_map(code);
    Superoperator::identity(code.dim()).combine(1.0 - epsilon, &phi, epsilon, MapKind::Channel)
}

/// Correction Kraus operators lifted to `K ⊗ I_bath`.
pub fn lifted_kraus(code: &CodeSpec, register: &QubitRegister) -> Result<Vec<CMatrix>> {
    if register.system_count() != code.system_count {
        return Err(Error::InvalidRegister(format!(
            "code `{}` needs {} system qubits, register has {}",
            code.name,
            code.system_count,
            register.system_count()
        )));
    }
    let bath = CMatrix::identity(register.bath_dim(), register.bath_dim());
    Ok(code.kraus.iter().map(|k| kron(k, &bath)).collect())
}

/// `Γ = (Φ − id) ⊗ id_bath` on the full register.
pub fn correction_generator(code: &CodeSpec, register: &QubitRegister) -> Result<Superoperator> {
    if register.dim() > DENSE_HILBERT_LIMIT {
        return Err(Error::Unsupported(format!(
            "dense correction generator on a {}-dimensional register; use MatrixFreeGenerator",
            register.dim()
        )));
    }
    let phi = Superoperator::from_kraus(&lifted_kraus(code, register)?)?;
    phi.combine(1.0, &Superoperator::identity(register.dim()), -1.0, MapKind::Generator)
}

/// Coupling of every system qubit to its own bath qubit:
/// `H = γ Σ_i X_i^S ⊗ X_i^B`.
pub fn system_bath_hamiltonian(system_count: usize, gamma: f64) -> Result<CMatrix> {
    let register = QubitRegister::new(system_count, system_count)?;
    let n = register.len();
    let mut h = CMatrix::zeros(register.dim(), register.dim());
    for i in 0..system_count {
        let mut letters = vec![Pauli::I; n];
        letters[i] = Pauli::X;
        letters[i + system_count] = Pauli::X;
        h += pauli_matrix(&PauliString::new(letters)) * C64::new(gamma, 0.0);
    }
    Ok(h)
}

/// `ρ ↦ −i[H,ρ] + Σ_j λ_j(L_j ρ L_j† − ½{L_j†L_j, ρ}) + κ(Σ K ρ K† − ρ)`
/// without materializing the superoperator.
#[derive(Debug, Clone)]
pub struct MatrixFreeGenerator {
    dim: usize,
    hamiltonian: Option<SparseOperator>,
    jumps: Vec<(SparseOperator, SparseOperator, f64)>,
    kraus: Vec<SparseOperator>,
    kappa: f64,
}

impl MatrixFreeGenerator {
    pub fn new(
        hamiltonian: Option<&CMatrix>,
        jump_ops: &[(CMatrix, f64)],
        kraus: &[CMatrix],
        kappa: f64,
    ) -> Result<Self> {
        let dim = hamiltonian
            .map(|h| h.nrows())
            .or_else(|| kraus.first().map(|k| k.nrows()))
            .or_else(|| jump_ops.first().map(|(l, _)| l.nrows()))
            .ok_or_else(|| Error::InvalidParams("empty generator".into()))?;
        let check = |m: &CMatrix| {
            if m.nrows() != dim || m.ncols() != dim {
                Err(Error::DimensionMismatch { expected: dim, found: m.nrows() })
            } else {
                Ok(())
            }
        };
        if let Some(h) = hamiltonian {
            check_hermitian(h)?;
        }
        for (l, _) in jump_ops {
            check(l)?;
        }
        for k in kraus {
            check(k)?;
        }
        if kappa < 0.0 {
            return Err(Error::OutOfRange { name: "kappa", value: kappa });
        }
        Ok(Self {
            dim,
            hamiltonian: hamiltonian.map(SparseOperator::from_dense),
            jumps: jump_ops
                .iter()
                .map(|(l, rate)| {
                    (SparseOperator::from_dense(l), SparseOperator::from_dense(&(l.adjoint() * l)), *rate)
                })
                .collect(),
            kraus: kraus.iter().map(SparseOperator::from_dense).collect(),
            kappa,
        })
    }
}

impl Generator for MatrixFreeGenerator {
    fn hilbert_dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        if let Some(h) = &self.hamiltonian {
            // H is Hermitian, so ρH = ρH†.
            out += (h.left_mul(rho) - h.right_mul_adjoint(rho)) * (-I);
        }
        for (l, ldl, rate) in &self.jumps {
            let anti = ldl.left_mul(rho) + ldl.right_mul_adjoint(rho);
            out += (l.sandwich(rho) - anti * C64::new(0.5, 0.0)) * C64::new(*rate, 0.0);
        }
        if self.kappa > 0.0 && !self.kraus.is_empty() {
            let mut phi = CMatrix::zeros(self.dim, self.dim);
            for k in &self.kraus {
                phi += k.sandwich(rho);
            }
            out += (phi - rho) * C64::new(self.kappa, 0.0);
        }
        out
    }

    fn correction_rate(&self) -> f64 {
        self.kappa
    }
}

/// Rates of a model. `r = κ/λ` and `R = κ/γ` are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModelParams {
    /// Markovian bit-flip rate λ.
    pub lambda: f64,
    /// System–bath coupling γ.
    pub gamma: f64,
    /// Error-correction rate κ.
    pub kappa: f64,
    /// Weak-map strength ε.
    pub epsilon: Option<f64>,
    /// Duration τ_c of one weak operation.
    pub tau_c: Option<f64>,
    /// System–ancilla coupling g.
    pub g: Option<f64>,
}

impl ModelParams {
    pub fn markovian(lambda: f64, kappa: f64) -> Self {
        Self { lambda, kappa, ..Self::default() }
    }

    pub fn hamiltonian(gamma: f64, kappa: f64) -> Self {
        Self { gamma, kappa, ..Self::default() }
    }

    /// `r = κ/λ`, when λ > 0.
    pub fn r(&self) -> Option<f64> {
        (self.lambda > 0.0).then(|| self.kappa / self.lambda)
    }

    /// `R = κ/γ`, when γ > 0.
    #[allow(non_snake_case)]
    pub fn R(&self) -> Option<f64> {
        (self.gamma > 0.0).then(|| self.kappa / self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [("lambda", self.lambda), ("gamma", self.gamma), ("kappa", self.kappa)];
        for (name, v) in rates {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::OutOfRange { name, value: v });
            }
        }
        let optional = [("epsilon", self.epsilon), ("tau_c", self.tau_c), ("g", self.g)];
        for (name, v) in optional {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::OutOfRange { name, value: v });
                }
            }
        }
        if let Some(eps) = self.epsilon {
            if eps > 1.0 {
                return Err(Error::OutOfRange { name: "epsilon", value: eps });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseFamily {
    /// Independent Lindblad bit flips at rate λ; no bath qubits.
    MarkovianBitFlip,
    /// One bath qubit per system qubit, coupled through `γ X ⊗ X`.
    HamiltonianXX,
}

/// A named combination of code, noise family and register layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scenario {
    pub name: &'static str,
    pub code: CodeKind,
    pub noise: NoiseFamily,
}

pub const SCENARIOS: [Scenario; 4] = [
    Scenario { name: "markovian-1q", code: CodeKind::Trivial, noise: NoiseFamily::MarkovianBitFlip },
    Scenario { name: "hamiltonian-1q", code: CodeKind::Trivial, noise: NoiseFamily::HamiltonianXX },
    Scenario { name: "markovian-3q", code: CodeKind::BitFlip3, noise: NoiseFamily::MarkovianBitFlip },
    Scenario { name: "hamiltonian-3q", code: CodeKind::BitFlip3, noise: NoiseFamily::HamiltonianXX },
];

impl Scenario {
    pub fn from_name(name: &str) -> Result<Self> {
        SCENARIOS
            .iter()
            .find(|s| s.name == name)
            .copied()
            .ok_or_else(|| Error::UnknownScenario(name.to_string()))
    }

    pub fn code_spec(&self) -> CodeSpec {
        self.code.build()
    }

    pub fn system_count(&self) -> usize {
        match self.code {
            CodeKind::Trivial => 1,
            CodeKind::BitFlip3 => 3,
        }
    }

    pub fn register(&self) -> QubitRegister {
        let n = self.system_count();
        let bath = match self.noise {
            NoiseFamily::MarkovianBitFlip => 0,
            NoiseFamily::HamiltonianXX => n,
        };
        QubitRegister::new(n, bath).expect("scenario registers are within limits")
    }

    pub fn is_hamiltonian(&self) -> bool {
        self.noise == NoiseFamily::HamiltonianXX
    }

    /// The rate that sets the dimensionless time axis: γ or λ.
    pub fn time_unit(&self, params: &ModelParams) -> f64 {
        match self.noise {
            NoiseFamily::MarkovianBitFlip => params.lambda,
            NoiseFamily::HamiltonianXX => params.gamma,
        }
    }

    /// `|0̄⟩⟨0̄|` on the system, maximally mixed bath.
    pub fn initial_state(&self) -> DensityMatrix {
        let code = self.code_spec();
        let sys = DensityMatrix::pure(QubitRegister::system(code.system_count).unwrap(), &code.logical_zero)
            .expect("logical zero is normalized");
        DensityMatrix::with_mixed_bath(&sys, self.register().bath_count()).expect("valid product state")
    }

    /// System–bath Hamiltonian; zero for Markovian scenarios.
    pub fn hamiltonian(&self, params: &ModelParams) -> CMatrix {
        match self.noise {
            NoiseFamily::HamiltonianXX => system_bath_hamiltonian(self.system_count(), params.gamma)
                .expect("scenario registers are within limits"),
            NoiseFamily::MarkovianBitFlip => {
                let d = self.register().dim();
                CMatrix::zeros(d, d)
            }
        }
    }

    pub fn total_generator(&self, params: &ModelParams) -> Result<TotalGenerator> {
        params.validate()?;
        let register = self.register();
        let code = self.code_spec();
        if register.dim() <= DENSE_HILBERT_LIMIT {
            let noise = match self.noise {
                NoiseFamily::MarkovianBitFlip => bitflip_lindblad(self.system_count(), params.lambda)?,
                NoiseFamily::HamiltonianXX => hamiltonian_generator(&self.hamiltonian(params))?,
            };
            let gamma = correction_generator(&code, &register)?;
            let total = noise.combine(1.0, &gamma, params.kappa, MapKind::Generator)?;
            Ok(TotalGenerator::Dense { generator: total, kappa: params.kappa })
        } else {
            let kraus = lifted_kraus(&code, &register)?;
            let gen = match self.noise {
                NoiseFamily::HamiltonianXX => {
                    MatrixFreeGenerator::new(Some(&self.hamiltonian(params)), &[], &kraus, params.kappa)?
                }
                NoiseFamily::MarkovianBitFlip => {
                    let n = register.len();
                    let jumps: Vec<(CMatrix, f64)> = (0..self.system_count())
                        .map(|j| (pauli_matrix(&PauliString::single(n, j, Pauli::X)), params.lambda))
                        .collect();
                    MatrixFreeGenerator::new(None, &jumps, &kraus, params.kappa)?
                }
            };
            Ok(TotalGenerator::MatrixFree(gen))
        }
    }
}

/// `L + κΓ` (Markovian) or `−i[H,·] + κΓ` (system–bath) for a scenario.
#[derive(Debug, Clone)]
pub enum TotalGenerator {
    Dense { generator: Superoperator, kappa: f64 },
    MatrixFree(MatrixFreeGenerator),
}

impl TotalGenerator {
    pub fn as_dense(&self) -> Option<&Superoperator> {
        match self {
            TotalGenerator::Dense { generator, .. } => Some(generator),
            TotalGenerator::MatrixFree(_) => None,
        }
    }

    /// Dimension of the vectorized space the generator acts on.
    pub fn superoperator_dim(&self) -> usize {
        let d = self.hilbert_dim();
        d * d
    }
}

impl Generator for TotalGenerator {
    fn hilbert_dim(&self) -> usize {
        match self {
            TotalGenerator::Dense { generator, .. } => generator.hilbert_dim(),
            TotalGenerator::MatrixFree(g) => g.hilbert_dim(),
        }
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        match self {
            TotalGenerator::Dense { generator, .. } => generator.apply(rho),
            TotalGenerator::MatrixFree(g) => g.apply(rho),
        }
    }

    fn correction_rate(&self) -> f64 {
        match self {
            TotalGenerator::Dense { kappa, .. } => *kappa,
            TotalGenerator::MatrixFree(g) => g.correction_rate(),
        }
    }

    fn dense(&self) -> Option<&Superoperator> {
        self.as_dense()
    }
}

/// Builds the total generator of a named scenario.
pub fn total_generator(scenario: &str, params: &ModelParams) -> Result<TotalGenerator> {
    Scenario::from_name(scenario)?.total_generator(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{bitflip3_code, trivial_code};
    use crate::tensor::{basis_ket, ket_bra};
    use crate::testutil::{random_density, random_hermitian_unit_trace, rng};

    fn proj(d: usize, i: usize) -> CMatrix {
        ket_bra(&basis_ket(d, i), &basis_ket(d, i))
    }

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn diag2(a: f64) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[r(a), r(0.0), r(0.0), r(1.0 - a)])
    }

    #[test]
    fn trivial_correction_resets_excited_state() {
        let phi = strong_map(&trivial_code());
        assert_eq!(phi.kind(), MapKind::Channel);
        assert!((phi.apply(&proj(2, 1)) - proj(2, 0)).norm() < 1e-15);
    }

    #[test]
    fn bitflip3_strong_map_examples() {
        let phi = strong_map(&bitflip3_code());
        assert!((phi.apply(&proj(8, 0b000)) - proj(8, 0b000)).norm() < 1e-15);
        assert!((phi.apply(&proj(8, 0b100)) - proj(8, 0b000)).norm() < 1e-15);
        // Two flips are misread as the complementary single flip.
        assert!((phi.apply(&proj(8, 0b110)) - proj(8, 0b111)).norm() < 1e-15);
    }

    #[test]
    fn correction_generator_examples() {
        let code = trivial_code();
        let reg = QubitRegister::system(1).unwrap();
        let gamma = correction_generator(&code, &reg).unwrap();
        assert!(gamma.apply(&proj(2, 0)).norm() < 1e-15);
        let alpha = 0.3;
        let out = gamma.apply(&diag2(alpha));
        let expected = CMatrix::from_row_slice(2, 2, &[r(1.0 - alpha), r(0.0), r(0.0), r(alpha - 1.0)]);
        assert!((out - expected).norm() < 1e-15);

        let mut g = rng(1);
        for _ in 0..20 {
            assert!(gamma.trace_defect(&random_hermitian_unit_trace(&mut g, 2)) < 1e-12);
        }

        let big = QubitRegister::new(1, 0).unwrap();
        assert!(correction_generator(&bitflip3_code(), &big).is_err());
        let six = QubitRegister::new(3, 3).unwrap();
        assert!(matches!(correction_generator(&bitflip3_code(), &six), Err(Error::Unsupported(_))));
    }

    #[test]
    fn single_qubit_bitflip_lindblad_rate() {
        let lambda = 0.7;
        let l = bitflip_lindblad(1, lambda).unwrap();
        for alpha in [1.0, 0.8, 0.5, 0.1] {
            let d = l.apply(&diag2(alpha));
            assert!((d[(0, 0)].re - (-lambda * (2.0 * alpha - 1.0))).abs() < 1e-14);
        }
    }

    #[test]
    fn three_qubit_bitflip_lindblad_matches_sum_of_flips() {
        let lambda = 1.3;
        let l = bitflip_lindblad(3, lambda).unwrap();
        let mut g = rng(2);
        let rho = random_density(&mut g, 8);
        let mut expected = CMatrix::zeros(8, 8);
        for j in 0..3 {
            let x = pauli_matrix(&PauliString::single(3, j, Pauli::X));
            expected += (&x * &rho * &x - &rho) * r(lambda);
        }
        assert!((l.apply(&rho) - expected).norm() < 1e-13);
    }

    #[test]
    fn zero_lindblad_is_zero() {
        let l = lindblad_generator(&CMatrix::zeros(2, 2), &[(Pauli::X.matrix(), 0.0)]).unwrap();
        assert_eq!(l.matrix(), Superoperator::zero(2).matrix());
        assert!(lindblad_generator(&CMatrix::zeros(2, 2), &[(Pauli::X.matrix(), -1.0)]).is_err());
    }

    /// `ρ = (α|0⟩⟨0| + (1−α)|1⟩⟨1|) ⊗ I/2 − β Y ⊗ X/2`.
    fn joint_state(alpha: f64, beta: f64) -> CMatrix {
        let half = r(0.5);
        kron(&diag2(alpha), &(CMatrix::identity(2, 2) * half))
            - kron(&Pauli::Y.matrix(), &Pauli::X.matrix()) * r(beta) * half
    }

    fn alpha_beta_rates(out: &CMatrix) -> (f64, f64) {
        let p0 = kron(&proj(2, 0), &CMatrix::identity(2, 2));
        let yx = kron(&Pauli::Y.matrix(), &Pauli::X.matrix());
        ((&p0 * out).trace().re, -(&yx * out).trace().re / 2.0)
    }

    #[test]
    fn hamiltonian_flow_on_joint_state() {
        let gamma = 0.9;
        let h = kron(&Pauli::X.matrix(), &Pauli::X.matrix()) * r(gamma);
        let gen = hamiltonian_generator(&h).unwrap();
        let (alpha, beta) = (0.8, 0.25);
        let (da, db) = alpha_beta_rates(&gen.apply(&joint_state(alpha, beta)));
        assert!((da + 2.0 * gamma * beta).abs() < 1e-14);
        assert!((db - gamma * (2.0 * alpha - 1.0)).abs() < 1e-14);

        let hd = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![r(1.0), r(-2.0)]));
        assert!(hamiltonian_generator(&hd).unwrap().apply(&diag2(0.4)).norm() < 1e-15);

        let non_herm = CMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(0.0), r(0.0)]);
        assert!(matches!(hamiltonian_generator(&non_herm), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn weak_map_interpolates() {
        let code = bitflip3_code();
        assert_eq!(weak_map(&code, 0.0).unwrap().matrix(), Superoperator::identity(8).matrix());
        assert!((weak_map(&code, 1.0).unwrap().matrix() - strong_map(&code).matrix()).norm() < 1e-15);
        let out = weak_map(&code, 0.01).unwrap().apply(&proj(8, 0b100));
        let expected = proj(8, 0b100) * r(0.99) + proj(8, 0b000) * r(0.01);
        assert!((out - expected).norm() < 1e-15);
        assert!(weak_map(&code, 1.5).is_err());
        assert!(weak_map(&code, -0.1).is_err());
    }

    #[test]
    fn total_generator_markovian_1q_without_correction() {
        let params = ModelParams::markovian(0.6, 0.0);
        let total = total_generator("markovian-1q", &params).unwrap();
        let expected = bitflip_lindblad(1, 0.6).unwrap();
        assert!((total.as_dense().unwrap().matrix() - expected.matrix()).norm() < 1e-15);
    }

    #[test]
    fn total_generator_hamiltonian_1q_flow() {
        let (gamma, kappa) = (1.0, 2.5);
        let total = total_generator("hamiltonian-1q", &ModelParams::hamiltonian(gamma, kappa)).unwrap();
        assert_eq!(total.superoperator_dim(), 16);
        for (alpha, beta) in [(1.0, 0.0), (0.7, 0.3), (0.55, -0.2)] {
            let (da, db) = alpha_beta_rates(&total.apply(&joint_state(alpha, beta)));
            assert!((da - (kappa * (1.0 - alpha) - 2.0 * gamma * beta)).abs() < 1e-13);
            assert!((db - (gamma * (2.0 * alpha - 1.0) - kappa * beta)).abs() < 1e-13);
        }
    }

    #[test]
    fn hamiltonian_3q_generator_annihilates_trace() {
        let total = total_generator("hamiltonian-3q", &ModelParams::hamiltonian(1.0, 7.0)).unwrap();
        assert!(total.as_dense().is_none());
        assert_eq!(total.superoperator_dim(), 4096);
        assert!((total.correction_rate() - 7.0).abs() < 1e-15);
        // Weighted column sums: Tr G(|i⟩⟨j|) for every basis element.
        let mut worst = 0.0f64;
        for i in 0..64 {
            for j in 0..64 {
                let mut e = CMatrix::zeros(64, 64);
                e[(i, j)] = r(1.0);
                worst = worst.max(total.apply(&e).trace().norm());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn matrix_free_matches_dense_on_small_register() {
        let params = ModelParams::hamiltonian(0.8, 3.0);
        let scenario = Scenario::from_name("hamiltonian-1q").unwrap();
        let dense = scenario.total_generator(&params).unwrap();
        let reg = scenario.register();
        let mf = MatrixFreeGenerator::new(
            Some(&scenario.hamiltonian(&params)),
            &[],
            &lifted_kraus(&trivial_code(), &reg).unwrap(),
            3.0,
        )
        .unwrap();
        let mut g = rng(3);
        let rho = random_density(&mut g, 4);
        assert!((dense.apply(&rho) - mf.apply(&rho)).norm() < 1e-13);

        let lindblad_dense = bitflip_lindblad(3, 0.4).unwrap();
        let jumps: Vec<(CMatrix, f64)> =
            (0..3).map(|j| (pauli_matrix(&PauliString::single(3, j, Pauli::X)), 0.4)).collect();
        let lindblad_mf = MatrixFreeGenerator::new(None, &jumps, &[], 0.0).unwrap();
        let rho = random_density(&mut g, 8);
        assert!((lindblad_dense.apply(&rho) - lindblad_mf.apply(&rho)).norm() < 1e-13);
    }

    #[test]
    fn unknown_scenario_is_rejected() {
        assert!(matches!(
            total_generator("hamiltonian-5q", &ModelParams::default()),
            Err(Error::UnknownScenario(_))
        ));
        assert!(total_generator("markovian-1q", &ModelParams::markovian(-1.0, 0.0)).is_err());
    }

    #[test]
    fn model_params_ratios() {
        let p = ModelParams { lambda: 2.0, gamma: 0.0, kappa: 10.0, ..Default::default() };
        assert_eq!(p.r(), Some(5.0));
        assert_eq!(p.R(), None);
        let bad = ModelParams { epsilon: Some(1.2), ..Default::default() };
        assert!(bad.validate().is_err());
    }

    fn all_small_maps() -> Vec<Superoperator> {
        let mut maps = vec![strong_map(&trivial_code()), strong_map(&bitflip3_code())];
        maps.push(weak_map(&bitflip3_code(), 0.3).unwrap());
        maps.push(bitflip_lindblad(3, 0.7).unwrap());
        maps.push(correction_generator(&bitflip3_code(), &QubitRegister::system(3).unwrap()).unwrap());
        maps.push(
            correction_generator(&trivial_code(), &QubitRegister::new(1, 1).unwrap()).unwrap(),
        );
        for name in ["markovian-1q", "hamiltonian-1q", "markovian-3q"] {
            let params = ModelParams { lambda: 0.5, gamma: 1.0, kappa: 4.0, ..Default::default() };
            maps.push(total_generator(name, &params).unwrap().as_dense().unwrap().clone());
        }
        maps
    }

    #[test]
    fn trace_and_hermiticity_preservation() {
        let mut g = rng(4);
        for map in all_small_maps() {
            for _ in 0..100 {
                let rho = random_hermitian_unit_trace(&mut g, map.hilbert_dim());
                assert!(map.trace_defect(&rho) < 1e-12, "{:?}", map.kind());
                assert!(hermiticity_error(&map.apply(&rho)) < 1e-12);
            }
        }
    }

    #[test]
    fn strong_map_is_idempotent() {
        for code in [trivial_code(), bitflip3_code()] {
            let phi = strong_map(&code);
            let phi2 = phi.compose(&phi).unwrap();
            assert!((phi2.matrix() - phi.matrix()).norm() < 1e-12);
            assert_eq!(phi2.kind(), MapKind::Channel);
        }
    }

    #[test]
    fn correction_vanishes_on_code_space_with_any_bath() {
        let mut g = rng(5);
        // Trivial code with one bath qubit, dense.
        let gamma = correction_generator(&trivial_code(), &QubitRegister::new(1, 1).unwrap()).unwrap();
        for _ in 0..10 {
            let rho = kron(&proj(2, 0), &random_density(&mut g, 2));
            assert!(gamma.apply(&rho).norm() < 1e-12);
        }
        // Bit-flip code with three bath qubits, matrix-free.
        let code = bitflip3_code();
        let reg = QubitRegister::new(3, 3).unwrap();
        let mf = MatrixFreeGenerator::new(None, &[], &lifted_kraus(&code, &reg).unwrap(), 1.0).unwrap();
        for _ in 0..10 {
            let a = random_density(&mut g, 2);
            let mut code_state = CMatrix::zeros(8, 8);
            for (i, ci) in [0usize, 7].iter().enumerate() {
                for (j, cj) in [0usize, 7].iter().enumerate() {
                    code_state[(*ci, *cj)] = a[(i, j)];
                }
            }
            let rho = kron(&code_state, &random_density(&mut g, 8));
            assert!(mf.apply(&rho).norm() < 1e-12);
        }
    }
}
