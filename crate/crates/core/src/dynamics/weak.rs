//! Discrete error correction: unitary evolution for `τ_c` alternating with
//! the weak map `(1 − ε)ρ + εΦ(ρ)`.

use crate::codes::CodeSpec;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::maps::lifted_kraus;
use crate::tensor::{CMatrix, DensityMatrix, SparseOperator, C64};

/// `exp(−iHt)` for Hermitian `H`.
pub fn unitary(h: &CMatrix, t: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let phases = eig.eigenvalues.map(|e| C64::new(0.0, -e * t).exp());
    let v = &eig.eigenvectors;
    v * CMatrix::from_diagonal(&phases) * v.adjoint()
}

/// Runs `n_steps` weak-map cycles and records every state.
pub fn step_weak_map(
    rho0: &DensityMatrix,
    h: &CMatrix,
    code: &CodeSpec,
    epsilon: f64,
    tau_c: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    step_weak_map_strided(rho0, h, code, epsilon, tau_c, n_steps, 1)
}

/// As [`step_weak_map`], keeping every `stride`-th state (and always the last).
pub fn step_weak_map_strided(
    rho0: &DensityMatrix,
    h: &CMatrix,
    code: &CodeSpec,
    epsilon: f64,
    tau_c: f64,
    n_steps: usize,
    stride: usize,
) -> Result<Trajectory> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::OutOfRange { name: "epsilon", value: epsilon });
    }
    if !(tau_c > 0.0) {
        return Err(Error::OutOfRange { name: "tau_c", value: tau_c });
    }
    if n_steps == 0 || stride == 0 {
        return Err(Error::InvalidParams("n_steps and stride must be at least 1".into()));
    }
    let register = rho0.register().clone();
    if h.nrows() != register.dim() {
        return Err(Error::DimensionMismatch { expected: register.dim(), found: h.nrows() });
    }
    let u = SparseOperator::from_dense(&unitary(h, tau_c));
    let kraus: Vec<SparseOperator> =
        lifted_kraus(code, &register)?.iter().map(SparseOperator::from_dense).collect();
    let keep = C64::new(1.0 - epsilon, 0.0);
    let eps = C64::new(epsilon, 0.0);

    let mut rho = rho0.matrix().clone();
    let mut times = vec![0.0];
    let mut states = vec![rho0.clone()];
    for k in 1..=n_steps {
        rho = u.sandwich(&rho);
        let corrected = kraus.iter().fold(CMatrix::zeros(rho.nrows(), rho.ncols()), |acc, op| acc + op.sandwich(&rho));
        rho = &rho * keep + corrected * eps;
        if k % stride == 0 || k == n_steps {
            times.push(k as f64 * tau_c);
            states.push(DensityMatrix::from_parts_unchecked(register.clone(), rho.clone())?);
        }
    }
    Ok(Trajectory { times, states, warnings: Vec::new() })
}
