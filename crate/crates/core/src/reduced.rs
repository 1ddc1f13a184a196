//! Symmetry-reduced model of the three-qubit code coupled to a three-qubit
//! bath through `γ Σ X_i ⊗ X_i`.
//!
//! Starting from `|000⟩⟨000| ⊗ I/8`, the joint state stays in the span of
//!
//! ```text
//! ϱ_{lmn,pqr} = |lmn⟩⟨pqr| ⊗ X^{l⊕p} ⊗ X^{m⊕q} ⊗ X^{n⊕r} / 8
//! ```
//!
//! with coefficient `(−i)^{l+m+n} i^{p+q+r} C_{lmn,pqr}`, all `C` real.
//! Qubit permutations and Hermiticity leave 13 distinct coefficients,
//! evolving under a 13×13 linear system.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::LinearPropagator;
use crate::error::{Error, Result};
use crate::tensor::{CMatrix, DensityMatrix, QubitRegister, C64, TOL_TRACE};

pub const N_CLASSES: usize = 13;

/// Weights of the diagonal classes in the trace: `C_{000,000}`,
/// `C_{100,100}`, `C_{110,110}`, `C_{111,111}`.
pub const TRACE_WEIGHTS: [(usize, f64); 4] = [(0, 1.0), (4, 3.0), (8, 3.0), (12, 1.0)];

const IMAGINARY_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-8;

/// Three bits; the first written bit is qubit 1, the most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bits3(u8);

impl Bits3 {
    pub fn new(value: u8) -> Result<Self> {
        if value > 7 {
            return Err(Error::InvalidParams(format!("{value} is not a 3-bit value")));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn ones(self) -> u32 {
        self.0.count_ones()
    }

    fn all() -> impl Iterator<Item = Bits3> {
        (0..8).map(Bits3)
    }
}

impl FromStr for Bits3 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() != 3 || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::InvalidParams(format!("`{s}` is not a bit triple")));
        }
        Ok(Self(u8::from_str_radix(s, 2).expect("checked binary digits")))
    }
}

impl fmt::Display for Bits3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:03b}", self.0)
    }
}

/// Class representatives `(lmn, pqr)` in vector order.
pub const REPRESENTATIVES: [(u8, u8); N_CLASSES] = [
    (0b000, 0b000),
    (0b100, 0b000),
    (0b110, 0b000),
    (0b100, 0b010),
    (0b100, 0b100),
    (0b110, 0b001),
    (0b111, 0b000),
    (0b110, 0b100),
    (0b110, 0b110),
    (0b110, 0b011),
    (0b111, 0b100),
    (0b111, 0b110),
    (0b111, 0b111),
];

/// `(ones on the left, ones on the right, ones in both)`.
pub type Signature = (u32, u32, u32);

fn signature(l: u8, p: u8) -> Signature {
    (l.count_ones(), p.count_ones(), (l & p).count_ones())
}

/// Index of the class containing `(l, p)`. A signature and its left/right
/// swap belong to the same class because the coefficients are Hermitian.
fn class_index(l: u8, p: u8) -> usize {
    let (a, b, o) = signature(l, p);
    REPRESENTATIVES
        .iter()
        .position(|&(rl, rp)| {
            let s = signature(rl, rp);
            s == (a, b, o) || s == (b, a, o)
        })
        .expect("every signature has a representative")
}

/// One of the 13 coefficient classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffClass {
    pub index: usize,
    pub representative: (Bits3, Bits3),
    pub signature: Signature,
    pub multiplicity: usize,
}

impl CoeffClass {
    pub fn all() -> Vec<CoeffClass> {
        (0..N_CLASSES).map(Self::by_index).collect()
    }

    pub fn by_index(index: usize) -> CoeffClass {
        let (l, p) = REPRESENTATIVES[index];
        let multiplicity = (0..8u8).flat_map(|a| (0..8u8).map(move |b| (a, b))).filter(|&(a, b)| class_index(a, b) == index).count();
        CoeffClass { index, representative: (Bits3(l), Bits3(p)), signature: signature(l, p), multiplicity }
    }

    /// `C_lmn_pqr`, usable as a CSV column name.
    pub fn label(&self) -> String {
        format!("C_{}_{}", self.representative.0, self.representative.1)
    }
}

pub fn coeff_class(lmn: Bits3, pqr: Bits3) -> CoeffClass {
    CoeffClass::by_index(class_index(lmn.0, pqr.0))
}

/// Column labels in vector order.
pub fn class_labels() -> Vec<String> {
    CoeffClass::all().iter().map(CoeffClass::label).collect()
}

/// The 13 real coefficients in vector order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState([f64; N_CLASSES]);

impl ReducedState {
    /// Checks finiteness and the weighted trace.
    pub fn new(coeffs: [f64; N_CLASSES]) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidState("non-finite reduced coefficient".into()));
        }
        let state = Self(coeffs);
        let tr = state.weighted_trace();
        if (tr - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("weighted trace {tr} differs from 1")));
        }
        Ok(state)
    }

    /// `C_{000,000} = 1`, everything else zero.
    pub fn initial() -> Self {
        let mut c = [0.0; N_CLASSES];
        c[0] = 1.0;
        Self(c)
    }

    pub fn from_vector(v: &DVector<f64>) -> Result<Self> {
        if v.len() != N_CLASSES {
            return Err(Error::DimensionMismatch { expected: N_CLASSES, found: v.len() });
        }
        let mut c = [0.0; N_CLASSES];
        c.copy_from_slice(v.as_slice());
        Self::new(c)
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_row_slice(&self.0)
    }

    pub fn coeffs(&self) -> &[f64; N_CLASSES] {
        &self.0
    }

    pub fn weighted_trace(&self) -> f64 {
        TRACE_WEIGHTS.iter().map(|&(i, w)| w * self.0[i]).sum()
    }

    /// Codeword fidelity `⟨000|ρ_S|000⟩ = C_{000,000}`.
    pub fn fidelity(&self) -> f64 {
        self.0[0]
    }

    /// Code-space weight `C_{000,000} + C_{111,111}`.
    pub fn code_space_weight(&self) -> f64 {
        self.0[0] + self.0[12]
    }
}

/// The 13×13 system matrix in units of γ, with `R = κ/γ`.
#[rustfmt::skip]
fn unit_matrix(r: f64) -> [[f64; N_CLASSES]; N_CLASSES] {
    [
        [0.0, -6.0, 0.0, 0.0, 3.0 * r, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, -r, -2.0, -2.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 2.0, -r, 0.0, 0.0, -1.0, -1.0, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 2.0, 0.0, -r, 0.0, -2.0, 0.0, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 2.0, 0.0, 0.0, -r, 0.0, 0.0, -4.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 2.0, 0.0, -r, 0.0, 0.0, 0.0, -2.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 3.0, 0.0, 0.0, -3.0 * r, 0.0, 0.0, 0.0, 0.0, -3.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, -r, -1.0, -1.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 4.0, -r, 0.0, 0.0, -2.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 2.0, 0.0, -r, 0.0, -2.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 2.0, 0.0, 0.0, -r, -2.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 2.0, -r, -1.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.0 * r, 0.0, 0.0, 6.0, 0.0],
    ]
}

/// `dC/dt = M C` with `M = γ·P(R)`.
#[allow(non_snake_case)]
pub fn build_reduced_matrix(R: f64, gamma: f64) -> DMatrix<f64> {
    let p = unit_matrix(R);
    DMatrix::from_fn(N_CLASSES, N_CLASSES, |i, j| gamma * p[i][j])
}

fn phase(l: u8, p: u8) -> C64 {
    C64::new(0.0, -1.0).powu(l.count_ones()) * C64::new(0.0, 1.0).powu(p.count_ones())
}

fn check_register(register: &QubitRegister) -> Result<()> {
    if register.system_count() != 3 || register.bath_count() != 3 {
        return Err(Error::InvalidRegister(format!(
            "reduced model needs 3 system and 3 bath qubits, got {} and {}",
            register.system_count(),
            register.bath_count()
        )));
    }
    Ok(())
}

fn check_reference(rho0: &DensityMatrix) -> Result<()> {
    let m = rho0.matrix();
    let mut expected = CMatrix::zeros(8, 8);
    expected[(0, 0)] = C64::new(1.0, 0.0);
    if m.nrows() != 8 || (m - expected).norm() > TOL_TRACE {
        return Err(Error::Unsupported("coefficient extraction requires the initial system state |000⟩⟨000|".into()));
    }
    Ok(())
}

/// The 64 raw coefficients `C_{lmn,pqr}`, indexed `8·lmn + pqr`.
pub fn raw_coefficients(rho: &CMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(64);
    for l in Bits3::all() {
        for p in Bits3::all() {
            let mask = (l.0 ^ p.0) as usize;
            let (row, col) = (l.0 as usize * 8, p.0 as usize * 8);
            let sum: C64 = (0..8).map(|b| rho[(row + b, col + (b ^ mask))]).sum();
            out.push(sum / phase(l.0, p.0));
        }
    }
    out
}

/// Largest max−min spread of the raw coefficients within any class.
pub fn class_spread(raw: &[C64]) -> f64 {
    let mut lo = [f64::INFINITY; N_CLASSES];
    let mut hi = [f64::NEG_INFINITY; N_CLASSES];
    for (k, c) in raw.iter().enumerate() {
        let idx = class_index((k / 8) as u8, (k % 8) as u8);
        lo[idx] = lo[idx].min(c.re);
        hi[idx] = hi[idx].max(c.re);
    }
    (0..N_CLASSES).map(|i| hi[i] - lo[i]).fold(0.0, f64::max)
}

fn assemble(coeff: impl Fn(u8, u8) -> C64) -> CMatrix {
    let mut m = CMatrix::zeros(64, 64);
    for l in 0..8u8 {
        for p in 0..8u8 {
            let value = phase(l, p) * coeff(l, p) * C64::new(0.125, 0.0);
            let mask = (l ^ p) as usize;
            for b in 0..8 {
                m[(l as usize * 8 + b, p as usize * 8 + (b ^ mask))] = value;
            }
        }
    }
    m
}

/// Projects a six-qubit state onto the reduced basis and averages each class.
pub fn extract_reduced(rho: &DensityMatrix, rho0: &DensityMatrix) -> Result<ReducedState> {
    check_register(rho.register())?;
    check_reference(rho0)?;
    let raw = raw_coefficients(rho.matrix());
    let worst_imag = raw.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if worst_imag > IMAGINARY_TOL {
        return Err(Error::ImaginaryCoefficient(worst_imag));
    }
    let residual = (rho.matrix() - assemble(|l, p| raw[l as usize * 8 + p as usize])).norm();
    if residual > RESIDUAL_TOL {
        return Err(Error::ReducedResidual(residual));
    }
    let mut sums = [0.0; N_CLASSES];
    let mut counts = [0usize; N_CLASSES];
    for (k, c) in raw.iter().enumerate() {
        let idx = class_index((k / 8) as u8, (k % 8) as u8);
        sums[idx] += c.re;
        counts[idx] += 1;
    }
    let mut coeffs = [0.0; N_CLASSES];
    for i in 0..N_CLASSES {
        coeffs[i] = sums[i] / counts[i] as f64;
    }
    ReducedState::new(coeffs)
}

/// Rebuilds the 64×64 joint state. Positivity is not checked: the weighted
/// trace is the only invariant a `ReducedState` carries.
pub fn expand_reduced(c: &ReducedState, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    check_reference(rho0)?;
    let m = assemble(|l, p| C64::new(c.0[class_index(l, p)], 0.0));
    DensityMatrix::from_parts_unchecked(QubitRegister::new(3, 3)?, m)
}

/// Sampled solution of the reduced system.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
}

/// Exact propagation of the reduced system from `x0`.
#[allow(non_snake_case)]
pub fn propagate_reduced(R: f64, gamma: f64, x0: &ReducedState, times: &[f64]) -> Result<ReducedTrajectory> {
    if !(gamma > 0.0) {
        return Err(Error::OutOfRange { name: "gamma", value: gamma });
    }
    if !(R >= 0.0) {
        return Err(Error::OutOfRange { name: "R", value: R });
    }
    let prop = LinearPropagator::new(&build_reduced_matrix(R, gamma));
    let states = prop
        .propagate(&x0.to_vector(), times)
        .iter()
        .map(ReducedState::from_vector)
        .collect::<Result<Vec<_>>>()?;
    Ok(ReducedTrajectory { times: times.to_vec(), states })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeSource {
    Decoherence,
    Correction,
}

/// A flow `from → to` carried by one off-diagonal matrix entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionEdge {
    pub from: String,
    pub to: String,
    pub rate_over_gamma: f64,
    pub source: EdgeSource,
}

/// Off-diagonal entries of the reduced matrix. Entries that change with R
/// come from error correction.
#[allow(non_snake_case)]
pub fn transition_graph(R: f64) -> Vec<TransitionEdge> {
    let m = unit_matrix(R);
    let bare = unit_matrix(0.0);
    let unit = unit_matrix(1.0);
    let labels = class_labels();
    let mut edges = Vec::new();
    for j in 0..N_CLASSES {
        for i in 0..N_CLASSES {
            if i == j || m[i][j] == 0.0 {
                continue;
            }
            let source = if unit[i][j] != bare[i][j] { EdgeSource::Correction } else { EdgeSource::Decoherence };
            edges.push(TransitionEdge {
                from: labels[j].clone(),
                to: labels[i].clone(),
                rate_over_gamma: m[i][j],
                source,
            });
        }
    }
    edges
}
