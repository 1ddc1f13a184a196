//! Least-squares fits: power laws, short-time quadratics and damped cosines.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    PowerLaw,
    DampedCosine,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: BTreeMap<String, f64>,
    pub stderr: BTreeMap<String, f64>,
    /// Euclidean norm of the residual vector.
    pub residual: f64,
    pub window: [f64; 2],
}

impl FitResult {
    /// Parameter by name; panics on names the model does not define.
    pub fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn error(&self, name: &str) -> f64 {
        self.stderr[name]
    }

    fn new(model: FitModel, names: &[&str], values: &[f64], errors: &[f64], residual: f64, window: [f64; 2]) -> Self {
        let params = names.iter().zip(values).map(|(n, v)| (n.to_string(), *v)).collect();
        let stderr = names.iter().zip(errors).map(|(n, v)| (n.to_string(), *v)).collect();
        Self { model, params, stderr, residual, window }
    }
}

struct LinearFit {
    coeffs: DVector<f64>,
    stderr: Vec<f64>,
    residual: f64,
}

/// Ordinary least squares `y ≈ A c` with classical standard errors.
fn linear_least_squares(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<LinearFit> {
    let (n, p) = a.shape();
    let svd = a.clone().svd(true, true);
    let coeffs = svd.solve(y, 1e-14).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let resid = y - a * &coeffs;
    let rss = resid.norm_squared();
    let cov = (a.transpose() * a).try_inverse();
    let dof = n.saturating_sub(p).max(1) as f64;
    let stderr = (0..p)
        .map(|i| cov.as_ref().map_or(f64::NAN, |c| (c[(i, i)] * rss / dof).max(0.0).sqrt()))
        .collect();
    Ok(LinearFit { coeffs, stderr, residual: rss.sqrt() })
}

fn window_of(xs: impl Iterator<Item = f64> + Clone) -> [f64; 2] {
    [xs.clone().fold(f64::INFINITY, f64::min), xs.fold(f64::NEG_INFINITY, f64::max)]
}

/// `log y = intercept + slope·log x`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(Error::TooFewSamples { needed: 4, got: points.len() });
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::NonPositiveData);
    }
    let n = points.len();
    let a = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { points[i].0.ln() });
    let y = DVector::from_iterator(n, points.iter().map(|p| p.1.ln()));
    let fit = linear_least_squares(&a, &y)?;
    Ok(FitResult::new(
        FitModel::PowerLaw,
        &["intercept", "slope"],
        fit.coeffs.as_slice(),
        &fit.stderr,
        fit.residual,
        window_of(points.iter().map(|p| p.0)),
    ))
}

/// `y ≈ c2·t² + c3·t³`, the short-time form of a decay with zero initial slope.
pub fn fit_quadratic(times: &[f64], y: &[f64]) -> Result<FitResult> {
    let n = times.len();
    if n < 3 || y.len() != n {
        return Err(Error::TooFewSamples { needed: 3, got: n.min(y.len()) });
    }
    let a = DMatrix::from_fn(n, 2, |i, j| times[i].powi(2 + j as i32));
    let fit = linear_least_squares(&a, &DVector::from_row_slice(y))?;
    Ok(FitResult::new(
        FitModel::Quadratic,
        &["c2", "c3"],
        fit.coeffs.as_slice(),
        &fit.stderr,
        fit.residual,
        window_of(times.iter().copied()),
    ))
}

const DAMPED_NAMES: [&str; 4] = ["offset", "amplitude", "decay", "omega"];
const LM_MAX_ITERATIONS: usize = 500;

/// `offset + amplitude·e^{−decay·t}·cos(ω t)`.
fn damped_model(p: &[f64; 4], t: f64) -> f64 {
    p[0] + p[1] * (-p[2] * t).exp() * (p[3] * t).cos()
}

fn damped_jacobian(p: &[f64; 4], t: f64) -> [f64; 4] {
    let e = (-p[2] * t).exp();
    let (s, c) = (p[3] * t).sin_cos();
    [1.0, e * c, -p[1] * t * e * c, -p[1] * t * e * s]
}

/// Initial `(offset, amplitude, decay, ω)` from the spectrum and the
/// envelope of the samples.
pub fn damped_cosine_guess(times: &[f64], y: &[f64]) -> [f64; 4] {
    let n = times.len();
    let offset = y.iter().sum::<f64>() / n as f64;
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;

    let padded = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = y.iter().map(|v| Complex::new(v - offset, 0.0)).collect();
    buf.resize(padded, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let power: Vec<f64> = buf[..padded / 2].iter().map(|z| z.norm_sqr()).collect();
    let k = (1..power.len()).max_by(|&a, &b| power[a].total_cmp(&power[b])).unwrap_or(1);
    let shift = if k + 1 < power.len() {
        let (a, b, c) = (power[k - 1], power[k], power[k + 1]);
        let den = a - 2.0 * b + c;
        if den.abs() > 0.0 { 0.5 * (a - c) / den } else { 0.0 }
    } else {
        0.0
    };
    let omega = 2.0 * std::f64::consts::PI * (k as f64 + shift) / (padded as f64 * dt);

    // Log-linear fit through the local maxima of |y − offset|.
    let dev: Vec<f64> = y.iter().map(|v| (v - offset).abs()).collect();
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let left = i == 0 || dev[i] >= dev[i - 1];
        let right = i == n - 1 || dev[i] >= dev[i + 1];
        if left && right && dev[i] > 0.0 {
            peaks.push((times[i], dev[i].ln()));
        }
    }
    let decay = if peaks.len() >= 2 {
        let m = peaks.len() as f64;
        let mt = peaks.iter().map(|p| p.0).sum::<f64>() / m;
        let ml = peaks.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = peaks.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
        let sxx: f64 = peaks.iter().map(|p| (p.0 - mt).powi(2)).sum();
        if sxx > 0.0 { (-sxy / sxx).max(0.0) } else { 0.0 }
    } else {
        0.0
    };
    let amplitude = y[0] - offset;
    [offset, amplitude, decay, omega]
}

/// Levenberg–Marquardt fit of `offset + amplitude·e^{−decay·t}·cos(ωt)`.
pub fn fit_damped_cosine(times: &[f64], y: &[f64]) -> Result<FitResult> {
    let n = times.len();
    if n < 8 || y.len() != n {
        return Err(Error::TooFewSamples { needed: 8, got: n.min(y.len()) });
    }
    let guess = damped_cosine_guess(times, y);
    fit_damped_cosine_from(times, y, guess)
}

/// As [`fit_damped_cosine`] with a caller-provided starting point.
pub fn fit_damped_cosine_from(times: &[f64], y: &[f64], guess: [f64; 4]) -> Result<FitResult> {
    let n = times.len();
    let cost = |p: &[f64; 4]| times.iter().zip(y).map(|(&t, &v)| (v - damped_model(p, t)).powi(2)).sum::<f64>();
    let mut p = guess;
    let mut current = cost(&p);
    let mut mu = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < LM_MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = DMatrix::<f64>::zeros(4, 4);
        let mut jtr = DVector::<f64>::zeros(4);
        for (&t, &v) in times.iter().zip(y) {
            let j = DVector::from_row_slice(&damped_jacobian(&p, t));
            let r = v - damped_model(&p, t);
            jtj += &j * j.transpose();
            jtr += &j * r;
        }
        let mut improved = false;
        while mu < 1e12 {
            let mut a = jtj.clone();
            for i in 0..4 {
                a[(i, i)] += mu * jtj[(i, i)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                mu *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
            let c = cost(&trial);
            if c.is_finite() && c <= current {
                let rel_gain = (current - c) / current.max(f64::MIN_POSITIVE);
                let rel_step = (0..4).map(|i| step[i].abs() / (p[i].abs() + 1e-300)).fold(0.0, f64::max);
                p = trial;
                current = c;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                if rel_gain < 1e-14 || rel_step < 1e-12 {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
        }
        if converged || !improved {
            // A step that cannot lower the cost at any damping is a minimum.
            converged = true;
            break;
        }
    }
    if !converged || p.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitNonConvergence { iterations, residual: current.sqrt() });
    }

    let mut jtj = DMatrix::<f64>::zeros(4, 4);
    for &t in times {
        let j = DVector::from_row_slice(&damped_jacobian(&p, t));
        jtj += &j * j.transpose();
    }
    let s2 = current / (n.saturating_sub(4).max(1)) as f64;
    let errors: Vec<f64> = match jtj.try_inverse() {
        Some(cov) => (0..4).map(|i| (cov[(i, i)] * s2).max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; 4],
    };
    // Report a non-negative frequency; cos is even.
    p[3] = p[3].abs();
    Ok(FitResult::new(FitModel::DampedCosine, &DAMPED_NAMES, &p, &errors, current.sqrt(), window_of(times.iter().copied())))
}
