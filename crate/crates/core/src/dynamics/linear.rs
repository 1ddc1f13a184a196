//! Exact propagation of `dx/dt = M x` for small real constant `M`.
//!
//! The primary path diagonalizes `M`; when the eigenbasis is ill-conditioned
//! (or the matrix is defective) it falls back to scaling-and-squaring.

use log::debug;
use nalgebra::{DMatrix, DVector};

use crate::tensor::{CMatrix, CVector, C64};

/// Eigenbasis condition number above which the exponential is used instead.
pub const MAX_EIGENBASIS_CONDITION: f64 = 1e8;

const INVERSE_ITERATIONS: usize = 3;

/// Eigenvalues this small relative to `‖M‖` are set to exactly zero, so a
/// stationary component does not drift as `e^{δt}` over long horizons.
const ZERO_SNAP: f64 = 1e-12;

/// Eigenvalues of a real square matrix.
pub fn spectrum(m: &DMatrix<f64>) -> Vec<C64> {
    m.complex_eigenvalues().iter().copied().collect()
}

#[derive(Debug, Clone)]
enum Mode {
    Eigen { values: Vec<C64>, vectors: CMatrix },
    Expm,
}

/// Reusable propagator for a fixed matrix.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    matrix: DMatrix<f64>,
    mode: Mode,
    condition: f64,
}

impl LinearPropagator {
    pub fn new(matrix: &DMatrix<f64>) -> Self {
        assert!(matrix.is_square(), "propagator needs a square matrix");
        let mode_and_cond = eigenbasis(matrix);
        let (mode, condition) = match mode_and_cond {
            Some((values, vectors, cond)) if cond <= MAX_EIGENBASIS_CONDITION => {
                (Mode::Eigen { values, vectors }, cond)
            }
            Some((_, _, cond)) => {
                debug!("eigenbasis condition {cond:.3e}; using matrix exponential");
                (Mode::Expm, cond)
            }
            None => (Mode::Expm, f64::INFINITY),
        };
        Self { matrix: matrix.clone(), mode, condition }
    }

    /// Whether propagation goes through the eigendecomposition.
    pub fn is_spectral(&self) -> bool {
        matches!(self.mode, Mode::Eigen { .. })
    }

    /// Condition number of the eigenvector matrix (∞ if it could not be built).
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn eigenvalues(&self) -> Option<&[C64]> {
        match &self.mode {
            Mode::Eigen { values, .. } => Some(values),
            Mode::Expm => None,
        }
    }

    /// `exp(M t)·x0` at every requested time.
    pub fn propagate(&self, x0: &DVector<f64>, times: &[f64]) -> Vec<DVector<f64>> {
        assert_eq!(x0.len(), self.matrix.nrows(), "state length must match the matrix");
        match &self.mode {
            Mode::Eigen { values, vectors } => {
                let x0c: CVector = x0.map(|v| C64::new(v, 0.0));
                let coeffs = vectors
                    .clone()
                    .lu()
                    .solve(&x0c)
                    .expect("eigenbasis was checked to be well-conditioned");
                times
                    .iter()
                    .map(|&t| {
                        // Exact at t = 0, without the round trip through the eigenbasis.
                        if t == 0.0 {
                            return x0.clone();
                        }
                        let scaled = CVector::from_iterator(
                            values.len(),
                            values.iter().zip(coeffs.iter()).map(|(l, c)| (l * t).exp() * c),
                        );
                        (vectors * scaled).map(|z| z.re)
                    })
                    .collect()
            }
            Mode::Expm => propagate_linear_expm(&self.matrix, x0, times),
        }
    }
}

/// `x(t) = exp(M t)·x0` through the eigendecomposition of `M`, falling back to
/// the matrix exponential when the eigenbasis is ill-conditioned.
pub fn propagate_linear(m: &DMatrix<f64>, x0: &DVector<f64>, times: &[f64]) -> Vec<DVector<f64>> {
    LinearPropagator::new(m).propagate(x0, times)
}

/// `x(t) = exp(M t)·x0` by scaling-and-squaring at each time.
pub fn propagate_linear_expm(m: &DMatrix<f64>, x0: &DVector<f64>, times: &[f64]) -> Vec<DVector<f64>> {
    times.iter().map(|&t| (m * t).exp() * x0).collect()
}

/// Eigenvalues, unit eigenvectors (as columns) and the 2-norm condition
/// number of the eigenvector matrix.
fn eigenbasis(m: &DMatrix<f64>) -> Option<(Vec<C64>, CMatrix, f64)> {
    let n = m.nrows();
    if n == 0 {
        return Some((Vec::new(), CMatrix::zeros(0, 0), 1.0));
    }
    let scale = m.norm().max(1.0);
    let values: Vec<C64> = spectrum(m)
        .into_iter()
        .map(|v| if v.norm() <= ZERO_SNAP * scale { C64::new(0.0, 0.0) } else { v })
        .collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return None;
    }
    let mc: CMatrix = m.map(|v| C64::new(v, 0.0));
    let cluster_tol = 1e-8 * scale;
    let mut vectors = CMatrix::zeros(n, n);

    for (k, &lambda) in values.iter().enumerate() {
        // Eigenvectors already found for nearly equal eigenvalues.
        let cluster: Vec<usize> = (0..k).filter(|&j| (values[j] - lambda).norm() < cluster_tol).collect();
        let shift = lambda + C64::new(1e-10 * scale, 1e-10 * scale);
        let mut a = mc.clone();
        for i in 0..n {
            a[(i, i)] -= shift;
        }
        let lu = a.lu();
        let mut v = CVector::from_fn(n, |i, _| C64::new(1.0 + (i * 7 + k * 3) as f64 % 5.0, (i % 3) as f64 * 0.5));
        for _ in 0..INVERSE_ITERATIONS {
            v = lu.solve(&v)?;
            for &j in &cluster {
                let u = vectors.column(j).into_owned();
                let overlap = u.dotc(&v);
                v -= u * overlap;
            }
            let norm = v.norm();
            if !(norm.is_finite() && norm > 0.0) {
                return None;
            }
            v /= C64::new(norm, 0.0);
        }
        let residual = (&mc * &v - &v * lambda).norm();
        if residual > 1e-8 * scale {
            return None;
        }
        vectors.set_column(k, &v);
    }

    let sv = vectors.clone().svd(false, false).singular_values;
    let (max, min) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    Some((values, vectors, cond))
}
