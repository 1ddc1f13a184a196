//! Continuous quantum error correction of bit-flip noise.
//!
//! The library models error correction as a jump-type generator `κ(Φ − id)`
//! acting alongside either Markovian (Lindblad) bit-flip noise or a
//! Hamiltonian system–bath coupling `γ Σ X_i ⊗ X_i`, for the trivial
//! single-qubit code and the three-qubit bit-flip code.
//!
//! Module map:
//! - [`tensor`]: registers, density matrices, Pauli strings, vectorization.
//! - [`codes`], [`maps`]: codes, channels, generators and scenarios.
//! - [`dynamics`]: adaptive/fixed Runge–Kutta integration, exact linear
//!   propagation, weak-map stepping and jump Monte Carlo.
//! - [`reduced`]: the 13-coefficient model of the three-qubit system–bath case.
//! - [`closed_forms`]: analytic solutions and asymptotics.
//! - [`analysis`]: observables, fits, spectrum matching and equilibrium scans.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod closed_forms;
pub mod codes;
pub mod dynamics;
pub mod error;
pub mod maps;
pub mod reduced;
pub mod tensor;

#[cfg(test)]
pub(crate) mod testutil;

pub use codes::{bitflip3_code, trivial_code, CodeKind, CodeSpec};
pub use error::{Error, Result};
pub use maps::{
    total_generator, Generator, MapKind, ModelParams, NoiseFamily, Scenario, Superoperator,
    TotalGenerator, SCENARIOS,
};
pub use reduced::{CoeffClass, ReducedState, ReducedTrajectory};
pub use tensor::{CMatrix, CVector, DensityMatrix, PauliString, QubitRegister, C64};
