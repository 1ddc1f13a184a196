//! Per-sample codeword fidelity, code-space weight and error rate.

use serde::{Deserialize, Serialize};

use crate::codes::CodeSpec;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::reduced::ReducedTrajectory;
use crate::tensor::CVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSample {
    pub t: f64,
    /// `⟨ψ̄|ρ_S|ψ̄⟩`.
    pub f_cw: f64,
    /// `Tr{P_code ρ_S}`.
    pub p_cs: f64,
    /// `−dF_cw/dt`.
    pub lambda: f64,
}

/// `−dy/dt` on a possibly non-uniform grid: centered three-point
/// differences inside, one-sided three-point stencils at the ends.
pub fn error_rate(times: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = times.len();
    if n < 3 || y.len() != n {
        return Err(Error::TooFewSamples { needed: 3, got: n.min(y.len()) });
    }
    // Derivative at x[k] of the parabola through three points.
    let d3 = |x: [f64; 3], v: [f64; 3], k: usize| {
        let at = x[k];
        let w0 = ((at - x[1]) + (at - x[2])) / ((x[0] - x[1]) * (x[0] - x[2]));
        let w1 = ((at - x[0]) + (at - x[2])) / ((x[1] - x[0]) * (x[1] - x[2]));
        let w2 = ((at - x[0]) + (at - x[1])) / ((x[2] - x[0]) * (x[2] - x[1]));
        w0 * v[0] + w1 * v[1] + w2 * v[2]
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let j = i.clamp(1, n - 2) - 1;
        let x = [times[j], times[j + 1], times[j + 2]];
        let v = [y[j], y[j + 1], y[j + 2]];
        out.push(-d3(x, v, i - j));
    }
    Ok(out)
}

/// Assembles samples from precomputed fidelity and code-space series.
pub fn series_observables(times: &[f64], f_cw: &[f64], p_cs: &[f64]) -> Result<Vec<ObservableSample>> {
    let rate = error_rate(times, f_cw)?;
    Ok((0..times.len())
        .map(|i| ObservableSample { t: times[i], f_cw: f_cw[i], p_cs: p_cs[i], lambda: rate[i] })
        .collect())
}

/// Fidelity with `logical` and code-space weight of every sampled state.
pub fn fidelity_series(traj: &Trajectory, code: &CodeSpec, logical: &CVector) -> (Vec<f64>, Vec<f64>) {
    let p = code.code_projector();
    traj.states
        .iter()
        .map(|s| (s.system_overlap(logical), s.system_expectation(&p)))
        .unzip()
}

pub fn observables(traj: &Trajectory, code: &CodeSpec, logical: &CVector) -> Result<Vec<ObservableSample>> {
    if let Some(s) = traj.states.first() {
        if s.register().system_count() != code.system_count {
            return Err(Error::InvalidRegister(format!(
                "trajectory has {} system qubits, code `{}` needs {}",
                s.register().system_count(),
                code.name,
                code.system_count
            )));
        }
    }
    let (f, p) = fidelity_series(traj, code, logical);
    series_observables(&traj.times, &f, &p)
}

pub fn reduced_observables(traj: &ReducedTrajectory) -> Result<Vec<ObservableSample>> {
    let f: Vec<f64> = traj.states.iter().map(|s| s.fidelity()).collect();
    let p: Vec<f64> = traj.states.iter().map(|s| s.code_space_weight()).collect();
    series_observables(&traj.times, &f, &p)
}

/// Trapezoidal `∫ Λ dt` over the samples.
pub fn integrated_rate(samples: &[ObservableSample]) -> f64 {
    samples.windows(2).map(|w| 0.5 * (w[0].lambda + w[1].lambda) * (w[1].t - w[0].t)).sum()
}
