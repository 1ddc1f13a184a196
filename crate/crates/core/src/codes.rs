//! Stabilizer codes: code space, syndrome subspaces and the Kraus operators
//! of the full error-correcting operation.

use crate::error::{Error, Result};
use crate::tensor::{basis_ket, hermiticity_error, ket_bra, CMatrix, CVector};

const COMPLETENESS_TOL: f64 = 1e-12;

/// Names the codes known to the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeKind {
    /// One qubit protecting the known state `|0⟩`; stabilizer `Z`.
    Trivial,
    /// Three-qubit bit-flip code, stabilizers `ZZI` and `IZZ`.
    BitFlip3,
}

impl CodeKind {
    pub fn build(self) -> CodeSpec {
        match self {
            CodeKind::Trivial => trivial_code(),
            CodeKind::BitFlip3 => bitflip3_code(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CodeKind::Trivial => "trivial",
            CodeKind::BitFlip3 => "bitflip3",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "trivial" => Ok(CodeKind::Trivial),
            "bitflip3" => Ok(CodeKind::BitFlip3),
            other => Err(Error::InvalidParams(format!("unknown code `{other}`"))),
        }
    }
}

/// A code together with its syndrome decomposition and correction.
///
/// `kraus[i]` maps syndrome subspace `i` back into the code space, so
/// `Φ(ρ) = Σ_i K_i ρ K_i†` is the full error-correcting operation.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    pub name: String,
    pub system_count: usize,
    pub logical_zero: CVector,
    /// `None` for codes protecting a single known state.
    pub logical_one: Option<CVector>,
    pub syndrome_projectors: Vec<CMatrix>,
    pub kraus: Vec<CMatrix>,
}

impl CodeSpec {
    pub fn dim(&self) -> usize {
        1 << self.system_count
    }

    /// Projector onto the code space.
    pub fn code_projector(&self) -> CMatrix {
        let mut p = ket_bra(&self.logical_zero, &self.logical_zero);
        if let Some(one) = &self.logical_one {
            p += ket_bra(one, one);
        }
        p
    }

    /// Checks orthogonality and completeness of the syndrome projectors,
    /// trace preservation of the correction and orthonormality of the codewords.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let id = CMatrix::identity(d, d);
        let sum: CMatrix = self.syndrome_projectors.iter().fold(CMatrix::zeros(d, d), |a, p| a + p);
        if (sum - &id).norm() > COMPLETENESS_TOL {
            return Err(Error::InvalidParams("syndrome projectors do not sum to identity".into()));
        }
        for (i, p) in self.syndrome_projectors.iter().enumerate() {
            if hermiticity_error(p) > COMPLETENESS_TOL || (p * p - p).norm() > COMPLETENESS_TOL {
                return Err(Error::InvalidParams(format!("syndrome operator {i} is not a projector")));
            }
            for q in &self.syndrome_projectors[i + 1..] {
                if (p * q).norm() > COMPLETENESS_TOL {
                    return Err(Error::InvalidParams("syndrome projectors overlap".into()));
                }
            }
        }
        let completeness = self.kraus.iter().fold(CMatrix::zeros(d, d), |a, k| a + k.adjoint() * k);
        if (completeness - id).norm() > COMPLETENESS_TOL {
            return Err(Error::InvalidParams("correction Kraus operators are not complete".into()));
        }
        let zero_norm = self.logical_zero.norm();
        let mut bad = (zero_norm - 1.0).abs() > COMPLETENESS_TOL;
        if let Some(one) = &self.logical_one {
            bad |= (one.norm() - 1.0).abs() > COMPLETENESS_TOL;
            bad |= self.logical_zero.dotc(one).norm() > COMPLETENESS_TOL;
        }
        if bad {
            return Err(Error::InvalidParams("logical states are not orthonormal".into()));
        }
        Ok(())
    }
}

/// Trivial code: code space `span{|0⟩}`; correction resets `|1⟩` to `|0⟩`.
pub fn trivial_code() -> CodeSpec {
    let k0 = basis_ket(2, 0);
    let k1 = basis_ket(2, 1);
    CodeSpec {
        name: CodeKind::Trivial.name().into(),
        system_count: 1,
        logical_zero: k0.clone(),
        logical_one: None,
        syndrome_projectors: vec![ket_bra(&k0, &k0), ket_bra(&k1, &k1)],
        kraus: vec![ket_bra(&k0, &k0), ket_bra(&k0, &k1)],
    }
}

/// Three-qubit bit-flip code with codewords `|000⟩`, `|111⟩`.
///
/// Syndrome `j > 0` flags a bit flip on qubit `j`; its Kraus operator maps
/// `X_j|000⟩ ↦ |000⟩` and `X_j|111⟩ ↦ |111⟩`.
pub fn bitflip3_code() -> CodeSpec {
    let ket = |i: usize| basis_ket(8, i);
    let zero = ket(0b000);
    let one = ket(0b111);
    let mut projectors = Vec::with_capacity(4);
    let mut kraus = Vec::with_capacity(4);
    for flip in [0b000usize, 0b100, 0b010, 0b001] {
        let e0 = ket(flip);
        let e1 = ket(0b111 ^ flip);
        projectors.push(ket_bra(&e0, &e0) + ket_bra(&e1, &e1));
        kraus.push(ket_bra(&zero, &e0) + ket_bra(&one, &e1));
    }
    CodeSpec {
        name: CodeKind::BitFlip3.name().into(),
        system_count: 3,
        logical_zero: zero,
        logical_one: Some(one),
        syndrome_projectors: projectors,
        kraus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::C64;

    #[test]
    fn bitflip3_structure() {
        let code = bitflip3_code();
        code.validate().unwrap();
        assert_eq!(code.syndrome_projectors.len(), 4);
        for p in &code.syndrome_projectors {
            assert!((p.trace() - C64::new(2.0, 0.0)).norm() < 1e-15);
        }
        let completeness = code.kraus.iter().fold(CMatrix::zeros(8, 8), |a, k| a + k.adjoint() * k);
        assert_eq!(completeness, CMatrix::identity(8, 8));
        assert_eq!(code.code_projector().trace(), C64::new(2.0, 0.0));
    }

    #[test]
    fn trivial_structure() {
        let code = trivial_code();
        code.validate().unwrap();
        assert_eq!(code.syndrome_projectors.len(), 2);
        assert_eq!(code.kraus.len(), 2);
        assert_eq!(code.code_projector(), ket_bra(&basis_ket(2, 0), &basis_ket(2, 0)));
    }

    #[test]
    fn kind_round_trip() {
        for kind in [CodeKind::Trivial, CodeKind::BitFlip3] {
            assert_eq!(CodeKind::from_name(kind.name()).unwrap(), kind);
            assert_eq!(kind.build().name, kind.name());
        }
        assert!(CodeKind::from_name("steane").is_err());
    }

    #[test]
    fn validation_rejects_incomplete_kraus() {
        let mut code = bitflip3_code();
        code.kraus.pop();
        assert!(code.validate().is_err());
    }
}
