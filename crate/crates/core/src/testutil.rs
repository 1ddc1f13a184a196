//! Random inputs shared by unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::{CMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Hermitian, unit trace, not necessarily positive.
pub fn random_hermitian_unit_trace(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let a = random_matrix(rng, d);
    let mut h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    let shift = (C64::new(1.0, 0.0) - h.trace()) / C64::new(d as f64, 0.0);
    for i in 0..d {
        h[(i, i)] += shift;
    }
    h
}

/// Positive semidefinite with unit trace.
pub fn random_density(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let a = random_matrix(rng, d);
    let p = &a * a.adjoint();
    let tr = p.trace();
    p / tr
}
