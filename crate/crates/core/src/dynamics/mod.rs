//! Time evolution: master-equation integration, exact linear propagation,
//! discrete weak-map stepping and jump-process Monte Carlo.

pub mod jumps;
pub mod linear;
pub mod rk;
pub mod weak;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::Generator;
use crate::tensor::{min_eigenvalue, CMatrix, DensityMatrix, C64, TOL_POSITIVITY};

pub use jumps::{jump_monte_carlo, MonteCarloResult};
pub use linear::{propagate_linear, propagate_linear_expm, LinearPropagator};
pub use rk::{AdaptiveOptions, StepStats};
pub use weak::{step_weak_map, step_weak_map_strided};

/// Trace drift tolerated along a trajectory.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AdaptiveRk,
    FixedRk4,
    /// `exp(𝓛Δt)` on the dense superoperator, applied once per sample interval.
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step; further capped at `0.01/κ` when κ > 0.
    pub max_step: Option<f64>,
    /// Number of uniformly spaced samples including both ends.
    pub samples: usize,
    pub check_positivity: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::AdaptiveRk,
            rtol: 1e-9,
            atol: 1e-12,
            max_step: None,
            samples: 101,
            check_positivity: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) {
            return Err(Error::OutOfRange { name: "rtol", value: self.rtol });
        }
        if !(self.atol > 0.0) {
            return Err(Error::OutOfRange { name: "atol", value: self.atol });
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::OutOfRange { name: "max_step", value: h });
            }
        }
        if self.samples == 0 {
            return Err(Error::OutOfRange { name: "samples", value: 0.0 });
        }
        Ok(())
    }

    /// Step bound after applying the `0.01/κ` cap.
    pub fn effective_max_step(&self, kappa: f64) -> Option<f64> {
        let cap = (kappa > 0.0).then(|| 0.01 / kappa);
        match (self.max_step, cap) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Non-fatal findings recorded while integrating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TrajectoryWarning {
    PositivityDrift { t: f64, min_eigenvalue: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub warnings: Vec<TrajectoryWarning>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }

    /// Largest `|Tr ρ − 1|` over the samples.
    pub fn max_trace_drift(&self) -> f64 {
        self.states.iter().map(|s| (s.trace() - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max)
    }
}

/// `samples` uniformly spaced times on `[0, t_max]`; a single `0` when
/// `t_max == 0`.
pub fn sample_times(t_max: f64, samples: usize) -> Result<Vec<f64>> {
    if !t_max.is_finite() || t_max < 0.0 {
        return Err(Error::OutOfRange { name: "t_max", value: t_max });
    }
    if t_max == 0.0 || samples <= 1 {
        return Ok(vec![0.0]);
    }
    let n = samples - 1;
    Ok((0..=n).map(|i| if i == n { t_max } else { t_max * i as f64 / n as f64 }).collect())
}

/// Integrates `dρ/dt = 𝓛(ρ)` from `ρ0` and samples the state on a uniform grid.
pub fn integrate<G: Generator + ?Sized>(
    generator: &G,
    rho0: &DensityMatrix,
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if generator.hilbert_dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: generator.hilbert_dim(), found: rho0.dim() });
    }
    let times = sample_times(t_max, cfg.samples)?;
    let max_step = cfg.effective_max_step(generator.correction_rate());
    let y0 = rho0.matrix().clone();
    let rhs = |_: f64, y: &CMatrix| generator.apply(y);

    let matrices = match cfg.method {
        Method::AdaptiveRk => {
            let opts = AdaptiveOptions {
                rtol: cfg.rtol,
                atol: cfg.atol,
                max_step: max_step.unwrap_or(f64::INFINITY),
            };
            rk::dopri5(rhs, 0.0, &y0, &times, &opts)?.0
        }
        Method::FixedRk4 => {
            let spacing = if times.len() > 1 { times[1] } else { 1.0 };
            let h = max_step.unwrap_or(spacing / 10.0).min(spacing / 10.0);
            rk::rk4(rhs, 0.0, &y0, &times, h).0
        }
        Method::Spectral => spectral(generator, &y0, &times)?,
    };

    let mut warnings = Vec::new();
    let mut states = Vec::with_capacity(matrices.len());
    for (&t, m) in times.iter().zip(matrices) {
        let trace = m.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > TRACE_DRIFT_TOL {
            return Err(Error::TraceDrift { t, trace: trace.re });
        }
        if cfg.check_positivity {
            let min = min_eigenvalue(&m);
            if min < -100.0 * TOL_POSITIVITY {
                return Err(Error::PositivityViolation { t, min_eigenvalue: min });
            }
            if min < -TOL_POSITIVITY {
                warn!("positivity drift at t = {t:.6e}: minimum eigenvalue {min:.3e}");
                warnings.push(TrajectoryWarning::PositivityDrift { t, min_eigenvalue: min });
            }
        }
        states.push(DensityMatrix::from_parts_unchecked(rho0.register().clone(), m)?);
    }
    Ok(Trajectory { times, states, warnings })
}

fn spectral<G: Generator + ?Sized>(generator: &G, y0: &CMatrix, times: &[f64]) -> Result<Vec<CMatrix>> {
    let sup = generator
        .dense()
        .ok_or_else(|| Error::Unsupported("spectral integration needs a dense superoperator".into()))?;
    let d = y0.nrows();
    let mut out = Vec::with_capacity(times.len());
    let mut v = crate::tensor::vectorize(y0);
    out.push(y0.clone());
    if times.len() > 1 {
        let dt = times[1] - times[0];
        let step = (sup.matrix() * C64::new(dt, 0.0)).exp();
        for _ in 1..times.len() {
            v = &step * v;
            out.push(CMatrix::from_column_slice(d, d, v.as_slice()));
        }
    }
    Ok(out)
}
