//! Equilibrium-infidelity scans over the correction rate and the effective
//! coupling reduction of the encoded three-qubit system.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::fit::{fit_damped_cosine, FitResult};
use crate::dynamics::{integrate, IntegratorConfig, Method};
use crate::error::{Error, Result};
use crate::maps::{ModelParams, NoiseFamily, Scenario};
use crate::reduced::{build_reduced_matrix, propagate_reduced, ReducedState};
use crate::tensor::DensityMatrix;

/// When to call the infidelity stationary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonRule {
    /// First checkpoint, in units of the noise rate.
    pub start: f64,
    /// Largest relative change over one decade of time still counted as a plateau.
    pub rel_tol: f64,
    /// Number of decades tried before giving up.
    pub max_decades: u32,
    /// Samples used to average over one slow period (oscillatory case).
    pub period_samples: usize,
}

impl Default for HorizonRule {
    fn default() -> Self {
        Self { start: 1.0, rel_tol: 1e-4, max_decades: 10, period_samples: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    /// `r = κ/λ` (Markovian) or `R = κ/γ` (Hamiltonian).
    pub rate: f64,
    /// Equilibrium `1 − P_cs`.
    pub infidelity: Result<f64>,
}

/// Equilibrium infidelity `1 − P_cs` for each rate ratio, with the noise
/// rate fixed to 1. Points are evaluated in parallel and returned in grid order.
pub fn equilibrium_scan(scenario: &Scenario, grid: &[f64], rule: &HorizonRule) -> Result<Vec<ScanPoint>> {
    if grid.len() < 4 {
        return Err(Error::TooFewSamples { needed: 4, got: grid.len() });
    }
    Ok(grid
        .par_iter()
        .map(|&rate| ScanPoint { rate, infidelity: equilibrium_point(scenario, rate, rule) })
        .collect())
}

/// Equilibrium infidelity at one rate ratio.
pub fn equilibrium_point(scenario: &Scenario, rate: f64, rule: &HorizonRule) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::OutOfRange { name: "rate", value: rate });
    }
    match (scenario.noise, scenario.system_count()) {
        (NoiseFamily::HamiltonianXX, 3) => slow_period_average(rate, rule),
        _ => plateau(scenario, rate, rule),
    }
}

fn plateau(scenario: &Scenario, rate: f64, rule: &HorizonRule) -> Result<f64> {
    let params = match scenario.noise {
        NoiseFamily::MarkovianBitFlip => ModelParams::markovian(1.0, rate),
        NoiseFamily::HamiltonianXX => ModelParams::hamiltonian(1.0, rate),
    };
    let generator = scenario.total_generator(&params)?;
    let code = scenario.code_spec();
    let projector = code.code_projector();
    let rho0 = scenario.initial_state();
    let cfg = IntegratorConfig { method: Method::Spectral, samples: 2, check_positivity: false, ..Default::default() };
    let infidelity_at = |t: f64| -> Result<f64> {
        let traj = integrate(&generator, &rho0, t, &cfg)?;
        let last: &DensityMatrix = traj.final_state().expect("two samples");
        Ok(1.0 - last.system_expectation(&projector))
    };
    let mut t = rule.start;
    let mut previous = infidelity_at(t)?;
    for _ in 0..rule.max_decades {
        t *= 10.0;
        let current = infidelity_at(t)?;
        if (current - previous).abs() <= rule.rel_tol * current.abs() {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::NoPlateau { rate, horizon: t })
}

/// Angular frequency of the slow oscillation, read off the reduced spectrum.
#[allow(non_snake_case)]
pub fn slow_frequency(R: f64, gamma: f64) -> f64 {
    crate::dynamics::linear::spectrum(&build_reduced_matrix(R, gamma))
        .iter()
        .filter(|z| z.norm() > 1e-9 * gamma && z.re.abs() < 0.5 * R * gamma)
        .map(|z| z.im.abs())
        .fold(0.0, f64::max)
}

/// Mean `1 − P_cs` of the reduced model over one slow period, started after
/// the fast transients have died out.
#[allow(non_snake_case)]
fn slow_period_average(R: f64, rule: &HorizonRule) -> Result<f64> {
    let omega = slow_frequency(R, 1.0);
    if !(omega > 0.0) {
        return Err(Error::NoPlateau { rate: R, horizon: 0.0 });
    }
    let period = 2.0 * std::f64::consts::PI / omega;
    let t0 = 50.0 / R;
    let n = rule.period_samples.max(3);
    let times: Vec<f64> = (0..=n).map(|i| t0 + period * i as f64 / n as f64).collect();
    let traj = propagate_reduced(R, 1.0, &ReducedState::initial(), &times)?;
    let values: Vec<f64> = traj.states.iter().map(|s| 1.0 - s.code_space_weight()).collect();
    // Trapezoidal mean over the period.
    let integral: f64 = values.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>() / n as f64;
    Ok(integral)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingPoint {
    /// `R = κ/γ`.
    pub ratio: f64,
    /// Damped-cosine fit of the reduced-model codeword fidelity.
    pub fit: Result<FitResult>,
}

impl CouplingPoint {
    /// Factor `γ/γ_eff = 2γ/ω` by which the effective coupling is reduced.
    pub fn reduction(&self) -> Option<f64> {
        self.fit.as_ref().ok().map(|f| 2.0 / f.param("omega"))
    }
}

/// Fits the slow oscillation of `C_{000,000}` for each R over `periods` of
/// the leading-order period `πR²/12`, with `samples` points per fit.
#[allow(non_snake_case)]
pub fn coupling_reduction_scan(grid: &[f64], periods: f64, samples: usize) -> Vec<CouplingPoint> {
    grid.par_iter()
        .map(|&R| {
            let fit = (|| {
                let span = periods * std::f64::consts::PI * R * R / 12.0;
                let times: Vec<f64> = (0..samples).map(|i| span * i as f64 / (samples - 1) as f64).collect();
                let traj = propagate_reduced(R, 1.0, &ReducedState::initial(), &times)?;
                let f: Vec<f64> = traj.states.iter().map(|s| s.fidelity()).collect();
                fit_damped_cosine(&times, &f)
            })();
            CouplingPoint { ratio: R, fit }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{alpha_star_markov, alpha_star_nonmarkov, markov3q_exact_leak};

    #[test]
    fn markovian_1q_points_follow_closed_form() {
        let sc = Scenario::from_name("markovian-1q").unwrap();
        let pts = equilibrium_scan(&sc, &[10.0, 30.0, 100.0, 300.0], &HorizonRule::default()).unwrap();
        for p in pts {
            let v = p.infidelity.unwrap();
            assert!((v / (1.0 - alpha_star_markov(p.rate)) - 1.0).abs() < 1e-6, "{}", p.rate);
        }
    }

    #[test]
    fn hamiltonian_1q_points_follow_closed_form() {
        let sc = Scenario::from_name("hamiltonian-1q").unwrap();
        let pts = equilibrium_scan(&sc, &[10.0, 30.0, 100.0, 1000.0], &HorizonRule::default()).unwrap();
        for p in pts {
            let v = p.infidelity.unwrap();
            assert!((v / (1.0 - alpha_star_nonmarkov(p.rate)) - 1.0).abs() < 1e-4, "{}", p.rate);
        }
    }

    #[test]
    fn markovian_3q_points_follow_leak_formula() {
        let sc = Scenario::from_name("markovian-3q").unwrap();
        let pts = equilibrium_scan(&sc, &[10.0, 30.0, 100.0, 300.0], &HorizonRule::default()).unwrap();
        for p in pts {
            let expected = markov3q_exact_leak(f64::INFINITY, 1.0, p.rate).unwrap();
            assert!((p.infidelity.unwrap() / expected - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn short_grid_is_rejected() {
        let sc = Scenario::from_name("markovian-1q").unwrap();
        assert!(equilibrium_scan(&sc, &[1.0, 2.0], &HorizonRule::default()).is_err());
    }

    #[test]
    fn missing_plateau_is_reported_per_point() {
        let sc = Scenario::from_name("markovian-1q").unwrap();
        let rule = HorizonRule { start: 1e-6, max_decades: 1, ..Default::default() };
        let pts = equilibrium_scan(&sc, &[1.0, 2.0, 3.0, 4.0], &rule).unwrap();
        assert!(pts.iter().all(|p| matches!(p.infidelity, Err(Error::NoPlateau { .. }))));
    }

    #[test]
    fn slow_frequency_is_near_leading_order() {
        let w = slow_frequency(100.0, 1.0);
        assert!((w / 0.0024 - 1.0).abs() < 0.01);
    }

    #[test]
    fn hamiltonian_3q_average_is_small_and_positive() {
        let sc = Scenario::from_name("hamiltonian-3q").unwrap();
        let v = equilibrium_point(&sc, 30.0, &HorizonRule::default()).unwrap();
        assert!(v > 0.0 && v < 0.05, "{v}");
    }
}
