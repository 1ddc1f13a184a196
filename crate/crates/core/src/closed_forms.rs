//! Analytic solutions and asymptotic formulas used as reference curves.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::propagate_linear;
use crate::error::{Error, Result};
use crate::tensor::{hermiticity_error, kron, CMatrix, C64};

/// Below this R the large-R approximations are flagged as unreliable.
pub const APPROX_MIN_R: f64 = 10.0;

/// Joint-state parameters of the single-qubit system–bath model:
/// `ρ = [α|0⟩⟨0| + (1−α)|1⟩⟨1|] ⊗ I/2 − β Y ⊗ X/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitState {
    pub alpha: f64,
    pub beta: f64,
}

impl SingleQubitState {
    /// Positivity of the joint state bounds the hidden coherence.
    pub fn is_physical(&self) -> bool {
        (0.0..=1.0).contains(&self.alpha) && self.beta.abs() <= (self.alpha * (1.0 - self.alpha)).sqrt() + 1e-9
    }
}

/// Weights of the 0-, 1-, 2- and 3-flip sectors of the Markovian
/// three-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Markov3qCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Markov3qCoeffs {
    pub fn validate(&self) -> Result<()> {
        let sum = self.a + self.b + self.c + self.d;
        if [self.a, self.b, self.c, self.d].iter().any(|&w| w < -1e-10) || (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("sector weights {self:?} are not a distribution")));
        }
        Ok(())
    }

    /// Weight outside the code space.
    pub fn leak(&self) -> f64 {
        self.b + self.c
    }
}

/// Short-time decay `α(t) = 1 − Ct² + O(t³)` and its Zeno threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZenoEstimate {
    pub c: f64,
    pub delta_t_z: Option<f64>,
    pub alpha_z: Option<f64>,
}

impl ZenoEstimate {
    pub fn new(c: f64, delta_t_z: Option<f64>) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(Error::OutOfRange { name: "C", value: c });
        }
        Ok(Self { c, delta_t_z, alpha_z: delta_t_z.map(|dt| 1.0 - c * dt * dt) })
    }
}

/// Where a large-R approximation can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    /// Expected absolute precision, `1/R`.
    pub precision: f64,
    /// Dimensionless horizon `γt ≪ R³` beyond which corrections accumulate.
    pub horizon: f64,
    /// `R ≥ 10` and `γt < R³`.
    pub reliable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Approximation {
    pub value: f64,
    pub validity: Validity,
}

/// `α(t)` for the trivial code under Markovian bit flips.
pub fn alpha_markov_1q(t: f64, lambda: f64, kappa: f64) -> Result<f64> {
    if lambda < 0.0 || kappa < 0.0 {
        return Err(Error::InvalidParams("rates must be non-negative".into()));
    }
    if lambda == 0.0 && kappa == 0.0 {
        return Err(Error::InvalidParams("λ and κ are both zero".into()));
    }
    // α* = 1 − 1/(2+r) written without dividing by λ.
    let star = (lambda + kappa) / (2.0 * lambda + kappa);
    Ok((1.0 - star) * (-(kappa + 2.0 * lambda) * t).exp() + star)
}

/// Right-hand side of `dα/dt = −λ(2α − 1) + κ(1 − α)`.
pub fn markov_1q_rhs(alpha: f64, lambda: f64, kappa: f64) -> f64 {
    -lambda * (2.0 * alpha - 1.0) + kappa * (1.0 - alpha)
}

pub fn alpha_star_markov(r: f64) -> f64 {
    1.0 - 1.0 / (2.0 + r)
}

#[allow(non_snake_case)]
pub fn alpha_star_nonmarkov(R: f64) -> f64 {
    1.0 - 2.0 / (4.0 + R * R)
}

/// `α(t)` for the trivial code coupled to one bath qubit.
pub fn alpha_nonmarkov_1q(t: f64, gamma: f64, kappa: f64) -> f64 {
    let den = 4.0 * gamma * gamma + kappa * kappa;
    let phase = 2.0 * gamma * t;
    (2.0 * gamma * gamma + kappa * kappa) / den
        + (-kappa * t).exp() * (kappa * gamma / den * phase.sin() + 2.0 * gamma * gamma / den * phase.cos())
}

/// `(α, β)` of the single-qubit system–bath model.
pub fn single_qubit_nonmarkov(t: f64, gamma: f64, kappa: f64) -> SingleQubitState {
    let alpha = alpha_nonmarkov_1q(t, gamma, kappa);
    // dα/dt of the closed form collapses to −γ e^{−κt} sin 2γt.
    let dalpha = -gamma * (-kappa * t).exp() * (2.0 * gamma * t).sin();
    let beta = (kappa * (1.0 - alpha) - dalpha) / (2.0 * gamma);
    SingleQubitState { alpha, beta }
}

/// `(dα/dt, dβ/dt) = (−2γβ + κ(1−α), γ(2α−1) − κβ)`.
pub fn nonmarkov_1q_rhs(s: SingleQubitState, gamma: f64, kappa: f64) -> (f64, f64) {
    (
        -2.0 * gamma * s.beta + kappa * (1.0 - s.alpha),
        gamma * (2.0 * s.alpha - 1.0) - kappa * s.beta,
    )
}

/// Exact weight `b + c` outside the code space, Markovian three-qubit code.
pub fn markov3q_exact_leak(t: f64, lambda: f64, kappa: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::OutOfRange { name: "lambda", value: lambda });
    }
    let rate = 4.0 * lambda + kappa;
    Ok(3.0 * lambda / rate * (1.0 - (-rate * t).exp()))
}

/// Large-r approximation `a(t) ≈ (1 + e^{−12λt/r})/2`.
pub fn markov3q_approx_a(t: f64, lambda: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::OutOfRange { name: "r", value: r });
    }
    Ok(0.5 * (1.0 + (-(6.0 / r) * 2.0 * lambda * t).exp()))
}

/// Generator of `(a, b, c, d)` under bit flips at rate λ and correction at κ.
pub fn markov3q_matrix(lambda: f64, kappa: f64) -> DMatrix<f64> {
    let (l, k) = (lambda, kappa);
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        -3.0 * l, l + k, 0.0, 0.0,
        3.0 * l, -3.0 * l - k, 2.0 * l, 0.0,
        0.0, 2.0 * l, -3.0 * l - k, 3.0 * l,
        0.0, 0.0, l + k, -3.0 * l,
    ]);
    m
}

/// Sector weights at time `t` from `a = 1`.
pub fn markov3q_coeffs(t: f64, lambda: f64, kappa: f64) -> Markov3qCoeffs {
    let x0 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    let x = &propagate_linear(&markov3q_matrix(lambda, kappa), &x0, &[t])[0];
    Markov3qCoeffs { a: x[0], b: x[1], c: x[2], d: x[3] }
}

#[allow(non_snake_case)]
fn validity(t: f64, gamma: f64, R: f64) -> Validity {
    if R < APPROX_MIN_R {
        warn!("large-R approximation evaluated at R = {R}");
    }
    let horizon = R.powi(3);
    Validity { precision: 1.0 / R, horizon, reliable: R >= APPROX_MIN_R && gamma * t < horizon }
}

/// Lowest-order codeword fidelity `(1 + cos(24γt/R²))/2`.
#[allow(non_snake_case)]
pub fn fidelity_approx_lowest(t: f64, gamma: f64, R: f64) -> Approximation {
    let value = 0.5 * (1.0 + (24.0 * gamma * t / (R * R)).cos());
    Approximation { value, validity: validity(t, gamma, R) }
}

/// Codeword fidelity with the slow damping `(1 + e^{−144γt/R³} cos(24γt/R²))/2`.
#[allow(non_snake_case)]
pub fn fidelity_approx_damped(t: f64, gamma: f64, R: f64) -> Approximation {
    let gt = gamma * t;
    let value = 0.5 * (1.0 + (-144.0 * gt / R.powi(3)).exp() * (24.0 * gt / (R * R)).cos());
    Approximation { value, validity: validity(t, gamma, R) }
}

/// Leading-order eigenvalues of the reduced matrix, `λ₀ … λ₁₂`.
#[allow(non_snake_case)]
pub fn table1_eigenvalues(R: f64, gamma: f64) -> Vec<C64> {
    let kappa = R * gamma;
    let s13 = 13f64.sqrt();
    let fast = |im: f64| C64::new(-kappa, im * gamma);
    let slow_re = -144.0 / R.powi(3) * gamma;
    let slow_im = 24.0 / (R * R) * gamma;
    vec![
        C64::new(0.0, 0.0),
        fast(0.0),
        fast(0.0),
        fast(2.0),
        fast(-2.0),
        fast(4.0),
        fast(-4.0),
        fast(s13 + 3.0),
        fast(-(s13 + 3.0)),
        fast(s13 - 3.0),
        fast(-(s13 - 3.0)),
        C64::new(slow_re, slow_im),
        C64::new(slow_re, -slow_im),
    ]
}

/// Index range of the slow pair in [`table1_eigenvalues`].
pub const TABLE1_SLOW: std::ops::Range<usize> = 11..13;

/// `Tr{H²(P₀⊗ρ_B)} − Tr{H(P₀⊗I)H(P₀⊗ρ_B)}` for a pure initial system state.
pub fn zeno_coefficient(h: &CMatrix, rho_system: &CMatrix, rho_bath: &CMatrix) -> Result<f64> {
    let dim = rho_system.nrows() * rho_bath.nrows();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: h.nrows() });
    }
    let dev = hermiticity_error(h);
    if dev > 1e-12 * h.norm().max(1.0) {
        return Err(Error::NonHermitian(dev));
    }
    let purity = (rho_system * rho_system).trace().re;
    if (purity - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("initial system state is not pure (purity {purity})")));
    }
    let p0 = rho_system;
    let state = kron(p0, rho_bath);
    let p0_id = kron(p0, &CMatrix::identity(rho_bath.nrows(), rho_bath.nrows()));
    let first = (h * h * &state).trace();
    let second = (h * p0_id * h * &state).trace();
    Ok((first - second).re)
}

/// `α* ≈ 1 − 4C/κ²`.
pub fn zeno_equilibrium(c: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::OutOfRange { name: "kappa", value: kappa });
    }
    Ok(1.0 - 4.0 * c / (kappa * kappa))
}

/// Effective correction rate `κ = g²τ_c` of a weakly coupled ancilla
/// (proportionality constant fixed to 1).
pub fn ancilla_rate(g: f64, tau_c: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::OutOfRange { name: "g", value: g });
    }
    if !(tau_c > 0.0) {
        return Err(Error::OutOfRange { name: "tau_c", value: tau_c });
    }
    Ok(g * g * tau_c)
}
