//! `simulate` and `fig`: trajectories from one of the four engines.

use std::path::{Path, PathBuf};

use cqec_core::analysis::error_rate;
use cqec_core::analysis::observables::fidelity_series;
use cqec_core::dynamics::{integrate, jump_monte_carlo, sample_times, step_weak_map_strided};
use cqec_core::reduced::{class_labels, extract_reduced, propagate_reduced, N_CLASSES};
use cqec_core::{DensityMatrix, QubitRegister, ReducedState};
use log::info;

use crate::config::{Engine, ExperimentConfig, Params};
use crate::error::CliError;
use crate::output::{write_sidecar, Table};

/// Agreement required between the full and reduced engines.
pub const CROSS_VALIDATION_TOL: f64 = 1e-6;

/// Sampled observables in dimensionless time.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub t: Vec<f64>,
    pub f_cw: Vec<f64>,
    pub p_cs: Vec<f64>,
    pub coeffs: Option<Vec<[f64; N_CLASSES]>>,
}

fn core<T>(r: cqec_core::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::from_core)
}

/// Runs `engine` on a resolved configuration.
pub fn run_engine(cfg: &ExperimentConfig, engine: Engine) -> Result<Series, CliError> {
    let sc = cfg.scenario()?;
    let params = cfg.model_params();
    let unit = cfg.time_unit();
    let horizon = cfg.t_max / unit;
    let code = sc.code_spec();
    let rho0 = sc.initial_state();
    let dimensionless = |times: &[f64]| times.iter().map(|t| t * unit).collect::<Vec<_>>();

    match engine {
        Engine::Full => {
            let generator = core(sc.total_generator(&params))?;
            let traj = core(integrate(&generator, &rho0, horizon, &cfg.integrator_config()))?;
            let (f_cw, p_cs) = fidelity_series(&traj, &code, &code.logical_zero);
            let coeffs = if sc.name == "hamiltonian-3q" {
                let reference = core(DensityMatrix::pure(core(QubitRegister::system(3))?, &code.logical_zero))?;
                let c = traj
                    .states
                    .iter()
                    .map(|s| extract_reduced(s, &reference).map(|x| *x.coeffs()))
                    .collect::<cqec_core::Result<Vec<_>>>();
                Some(core(c)?)
            } else {
                None
            };
            Ok(Series { t: dimensionless(&traj.times), f_cw, p_cs, coeffs })
        }
        Engine::Reduced => {
            let times = core(sample_times(horizon, cfg.samples))?;
            let ratio = cfg.params.ratio.expect("resolved");
            let traj = core(propagate_reduced(ratio, params.gamma, &ReducedState::initial(), &times))?;
            Ok(Series {
                t: dimensionless(&times),
                f_cw: traj.states.iter().map(|s| s.fidelity()).collect(),
                p_cs: traj.states.iter().map(|s| s.code_space_weight()).collect(),
                coeffs: Some(traj.states.iter().map(|s| *s.coeffs()).collect()),
            })
        }
        Engine::WeakStep => {
            let tau_c = cfg.params.tau_c.expect("resolved") / unit;
            let epsilon = cfg.params.epsilon.expect("resolved");
            let n_steps = (horizon / tau_c).round() as usize;
            let stride = if cfg.samples > 1 { (n_steps / (cfg.samples - 1)).max(1) } else { n_steps.max(1) };
            let h = sc.hamiltonian(&params);
            let traj = core(step_weak_map_strided(&rho0, &h, &code, epsilon, tau_c, n_steps, stride))?;
            let (f_cw, p_cs) = fidelity_series(&traj, &code, &code.logical_zero);
            Ok(Series { t: dimensionless(&traj.times), f_cw, p_cs, coeffs: None })
        }
        Engine::MonteCarlo => {
            let h = sc.hamiltonian(&params);
            let mc = core(jump_monte_carlo(&rho0, &h, &code, params.kappa, horizon, cfg.samples, cfg.n_traj, cfg.seed))?;
            let (_, p_cs) = fidelity_series(&mc.mean, &code, &code.logical_zero);
            Ok(Series { t: dimensionless(&mc.mean.times), f_cw: mc.fidelity, p_cs, coeffs: None })
        }
    }
}

/// Largest difference between two runs on the same grid.
pub fn max_deviation(a: &Series, b: &Series) -> Result<f64, CliError> {
    if a.t.len() != b.t.len() || a.t.iter().zip(&b.t).any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(1.0)) {
        return Err(CliError::Numerical("cross-validation runs have different time grids".into()));
    }
    let mut dev: f64 = 0.0;
    for (x, y) in a.f_cw.iter().zip(&b.f_cw).chain(a.p_cs.iter().zip(&b.p_cs)) {
        dev = dev.max((x - y).abs());
    }
    if let (Some(ca), Some(cb)) = (&a.coeffs, &b.coeffs) {
        for (x, y) in ca.iter().flatten().zip(cb.iter().flatten()) {
            dev = dev.max((x - y).abs());
        }
    }
    Ok(dev)
}

pub fn series_table(series: &Series) -> Table {
    let mut header: Vec<String> = ["t_dimensionless", "F_cw", "P_cs", "Lambda"].map(String::from).to_vec();
    if series.coeffs.is_some() {
        header.extend(class_labels());
    }
    // Λ needs three samples; shorter series report NaN.
    let lambda = error_rate(&series.t, &series.f_cw).unwrap_or_else(|_| vec![f64::NAN; series.t.len()]);
    let mut table = Table::new(header);
    for i in 0..series.t.len() {
        let mut row = vec![series.t[i], series.f_cw[i], series.p_cs[i], lambda[i]];
        if let Some(c) = &series.coeffs {
            row.extend_from_slice(&c[i]);
        }
        table.push_numbers(&row);
    }
    table
}

/// Runs a resolved configuration and writes its CSV and sidecar.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Series, CliError> {
    let series = run_engine(cfg, cfg.engine)?;
    if cfg.cross_validate {
        let other = if cfg.engine == Engine::Full { Engine::Reduced } else { Engine::Full };
        let dev = max_deviation(&series, &run_engine(cfg, other)?)?;
        info!("cross-validation {:?} vs {:?}: max deviation {dev:.3e}", cfg.engine, other);
        if !(dev <= CROSS_VALIDATION_TOL) {
            return Err(CliError::Numerical(format!(
                "full and reduced engines differ by {dev:.3e} (tolerance {CROSS_VALIDATION_TOL:e})"
            )));
        }
    }
    series_table(&series).write(cfg.out.as_deref())?;
    write_sidecar(cfg, cfg.out.as_deref())?;
    Ok(series)
}

/// The datasets behind one figure: `(file name, config)` pairs.
pub fn figure_configs(id: u32, out_dir: &Path) -> Result<Vec<ExperimentConfig>, CliError> {
    let make = |scenario: &str, engine: Engine, ratio: f64, t_max: f64, samples: usize, file: String| {
        ExperimentConfig {
            scenario: Some(scenario.into()),
            params: Params { gamma: Some(1.0), ratio: Some(ratio), ..Default::default() },
            engine,
            t_max,
            samples,
            out: Some(out_dir.join(file)),
            ..Default::default()
        }
    };
    let configs = match id {
        1 => [1.0, 2.0, 5.0]
            .iter()
            .map(|&r| make("hamiltonian-1q", Engine::Full, r, 10.0, 1001, format!("fig1_R{r}.csv")))
            .collect(),
        3 => vec![make("hamiltonian-3q", Engine::Reduced, 100.0, 3000.0, 6001, "fig3_R100.csv".into())],
        4 => vec![make("hamiltonian-3q", Engine::Full, 100.0, 0.5, 501, "fig4_R100.csv".into())],
        other => return Err(CliError::Config(format!("no figure {other}; choose 1, 3 or 4"))),
    };
    configs.into_iter().map(ExperimentConfig::resolve).collect()
}

/// Writes every dataset of a figure and returns the file paths.
pub fn figure(id: u32, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for cfg in figure_configs(id, out_dir)? {
        simulate(&cfg)?;
        written.extend(cfg.out);
    }
    Ok(written)
}
