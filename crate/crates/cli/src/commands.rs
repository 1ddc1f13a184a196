//! `eig`, `scan` and `graph`.

use std::path::{Path, PathBuf};

use cqec_core::analysis::spectrum::{closed_under_conjugation, ZERO_EIGENVALUE_TOL};
use cqec_core::analysis::{
    coupling_reduction_scan, equilibrium_scan, fit_power_law, match_table1, reduced_spectrum, FitResult, HorizonRule,
    Table1Match,
};
use cqec_core::reduced::{class_labels, transition_graph, TransitionEdge};
use serde::Serialize;

use crate::config::{ExperimentConfig, ScanMode, ScanSettings};
use crate::error::CliError;
use crate::output::{number, write_json, write_sidecar, Table};

/// Tolerance for pairing an eigenvalue with its conjugate, in units of γ.
const CONJUGATE_TOL: f64 = 1e-8;

#[derive(Debug, Serialize)]
pub struct EigReport {
    #[serde(flatten)]
    pub table: Table1Match,
    pub all_pass: bool,
    pub zero_eigenvalues: usize,
    pub closed_under_conjugation: bool,
    /// Per pair: the conjugate of its numerical eigenvalue is also in the spectrum.
    pub conjugate_present: Vec<bool>,
    pub config: ExperimentConfig,
}

pub fn eig(cfg: &ExperimentConfig) -> Result<EigReport, CliError> {
    let sc = cfg.scenario()?;
    if sc.name != "hamiltonian-3q" {
        return Err(CliError::Config(format!("eig needs hamiltonian-3q, got `{}`", sc.name)));
    }
    let p = cfg.model_params();
    let ratio = cfg.params.ratio.expect("resolved");
    let values = reduced_spectrum(ratio, p.gamma);
    let scale = p.gamma.max(f64::MIN_POSITIVE);
    let table = match_table1(&values, ratio, p.gamma);
    let conjugate_present = table
        .pairs
        .iter()
        .map(|pair| {
            let z = cqec_core::C64::new(pair.numerical[0], -pair.numerical[1]);
            values.iter().any(|w| (w - z).norm() <= CONJUGATE_TOL * scale)
        })
        .collect();
    let report = EigReport {
        all_pass: table.all_pass(),
        zero_eigenvalues: values.iter().filter(|z| z.norm() <= ZERO_EIGENVALUE_TOL * scale).count(),
        closed_under_conjugation: closed_under_conjugation(&values, CONJUGATE_TOL * scale),
        conjugate_present,
        table,
        config: cfg.clone(),
    };
    write_json(&report, cfg.out.as_deref())?;
    Ok(report)
}

/// Checks a scan request; scans carry their own rate grid instead of κ or R.
pub fn resolve_scan(mut cfg: ExperimentConfig) -> Result<ExperimentConfig, CliError> {
    let sc = cfg.scenario()?;
    cfg.code = Some(sc.code.name().to_string());
    let settings = *cfg.scan.get_or_insert_with(ScanSettings::default);
    let grid = cfg.grid.as_deref().unwrap_or(&[]);
    if grid.len() < 4 {
        return Err(CliError::Config(format!("a scan needs at least 4 grid points, got {}", grid.len())));
    }
    if let Some(bad) = grid.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(CliError::Config(format!("grid values must be positive, got {bad}")));
    }
    if settings.mode == ScanMode::Coupling {
        if sc.name != "hamiltonian-3q" {
            return Err(CliError::Config("coupling scans need hamiltonian-3q".into()));
        }
        if !(settings.periods > 0.0) || settings.fit_samples < 8 {
            return Err(CliError::Config("coupling scans need periods > 0 and at least 8 fit samples".into()));
        }
    }
    if cfg.params.kappa.is_some() || cfg.params.ratio.is_some() {
        return Err(CliError::Config("scans take rates from the grid; drop kappa and R".into()));
    }
    Ok(cfg)
}

/// `<out>.fit.json`.
pub fn fit_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".fit.json");
    PathBuf::from(name)
}

#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub table: Table,
    pub fit: Option<FitResult>,
}

pub fn scan(cfg: &ExperimentConfig) -> Result<ScanOutcome, CliError> {
    let sc = cfg.scenario()?;
    let settings = cfg.scan.unwrap_or_default();
    let grid = cfg.grid.clone().unwrap_or_default();
    let status = |e: &cqec_core::Error| e.to_string().replace(['\n', ','], " ");
    let mut points = Vec::new();
    let table = match settings.mode {
        ScanMode::Equilibrium => {
            let scanned = equilibrium_scan(&sc, &grid, &HorizonRule::default()).map_err(CliError::from_core)?;
            let mut table = Table::new(vec!["rate".into(), "infidelity".into(), "status".into()]);
            for p in scanned {
                let row = match &p.infidelity {
                    Ok(v) => {
                        points.push((p.rate, *v));
                        vec![number(p.rate), number(*v), "ok".into()]
                    }
                    Err(e) => vec![number(p.rate), number(f64::NAN), status(e)],
                };
                table.rows.push(row);
            }
            table
        }
        ScanMode::Coupling => {
            let header = ["R", "omega", "decay", "reduction", "status"].map(String::from).to_vec();
            let mut table = Table::new(header);
            for p in coupling_reduction_scan(&grid, settings.periods, settings.fit_samples) {
                let row = match (&p.fit, p.reduction()) {
                    (Ok(f), Some(red)) => {
                        points.push((p.ratio, red));
                        vec![number(p.ratio), number(f.param("omega")), number(f.param("decay")), number(red), "ok".into()]
                    }
                    (Err(e), _) => {
                        let nan = number(f64::NAN);
                        vec![number(p.ratio), nan.clone(), nan.clone(), nan, status(e)]
                    }
                    (Ok(_), None) => unreachable!("a successful fit always has a reduction"),
                };
                table.rows.push(row);
            }
            table
        }
    };
    table.write(cfg.out.as_deref())?;
    write_sidecar(cfg, cfg.out.as_deref())?;
    let fit = if settings.fit {
        let fit = fit_power_law(&points).map_err(|e| CliError::Fit(e.to_string()))?;
        if let Some(out) = &cfg.out {
            write_json(&fit, Some(&fit_path(out)))?;
        }
        Some(fit)
    } else {
        None
    };
    Ok(ScanOutcome { table, fit })
}

#[derive(Debug, Serialize)]
pub struct GraphReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub nodes: Vec<String>,
    pub edges: Vec<TransitionEdge>,
}

pub fn graph(ratio: f64, out: Option<&Path>) -> Result<GraphReport, CliError> {
    if !(ratio >= 0.0 && ratio.is_finite()) {
        return Err(CliError::Config(format!("R must be finite and non-negative, got {ratio}")));
    }
    let report = GraphReport { r: ratio, nodes: class_labels(), edges: transition_graph(ratio) };
    write_json(&report, out)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Params;

    fn scan_config(scenario: &str, grid: Vec<f64>, mode: ScanMode) -> ExperimentConfig {
        ExperimentConfig {
            scenario: Some(scenario.into()),
            grid: Some(grid),
            scan: Some(ScanSettings { mode, fit: true, ..Default::default() }),
            ..Default::default()
        }
    }

    #[test]
    fn eig_report_at_r_100() {
        let cfg = ExperimentConfig {
            scenario: Some("hamiltonian-3q".into()),
            params: Params { ratio: Some(100.0), ..Default::default() },
            ..Default::default()
        }
        .resolve()
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = cfg;
        cfg.out = Some(dir.path().join("eig.json"));
        let r = eig(&cfg).unwrap();
        assert!(r.all_pass);
        assert_eq!(r.zero_eigenvalues, 1);
        assert!(r.closed_under_conjugation);
        assert!(r.conjugate_present.iter().all(|&c| c));
    }

    #[test]
    fn scan_validation() {
        let short = scan_config("markovian-1q", vec![1.0, 2.0, 3.0], ScanMode::Equilibrium);
        assert!(matches!(resolve_scan(short), Err(CliError::Config(_))));
        let wrong = scan_config("markovian-1q", vec![1.0, 2.0, 3.0, 4.0], ScanMode::Coupling);
        assert!(matches!(resolve_scan(wrong), Err(CliError::Config(_))));
        let bad = scan_config("markovian-1q", vec![1.0, -2.0, 3.0, 4.0], ScanMode::Equilibrium);
        assert!(matches!(resolve_scan(bad), Err(CliError::Config(_))));
    }

    #[test]
    fn markovian_scan_fits_inverse_law() {
        let mut cfg = resolve_scan(scan_config("markovian-1q", vec![1e3, 3e3, 1e4, 3e4], ScanMode::Equilibrium)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        cfg.out = Some(dir.path().join("scan.csv"));
        let outcome = scan(&cfg).unwrap();
        assert_eq!(outcome.table.rows.len(), 4);
        let slope = outcome.fit.unwrap().param("slope");
        assert!((slope + 1.0).abs() < 0.01, "{slope}");
        assert!(fit_path(cfg.out.as_ref().unwrap()).exists());
    }

    #[test]
    fn graph_has_every_class() {
        let dir = tempfile::tempdir().unwrap();
        let g = graph(10.0, Some(&dir.path().join("graph.json"))).unwrap();
        assert_eq!(g.nodes.len(), 13);
        assert!(!g.edges.is_empty());
        assert!(matches!(graph(-1.0, None), Err(CliError::Config(_))));
    }
}
