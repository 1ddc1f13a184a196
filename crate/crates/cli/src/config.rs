//! Experiment configuration: an optional JSON file overlaid with inline flags,
//! then resolved into fully specified rates.

use std::path::{Path, PathBuf};

use cqec_core::dynamics::{IntegratorConfig, Method};
use cqec_core::{ModelParams, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Full,
    Reduced,
    WeakStep,
    MonteCarlo,
}

/// Rates. Only the ones relevant to the scenario may be set; after resolution
/// `kappa`, `R` and the scenario's noise rate are all present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// κ over the noise rate.
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// Weak-map strength (weak-step engine).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Weak-map duration in dimensionless time (weak-step engine).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSettings {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: Option<f64>,
    pub check_positivity: bool,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self { method: d.method, rtol: d.rtol, atol: d.atol, max_step: d.max_step, check_positivity: d.check_positivity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    /// Equilibrium `1 − P_cs` against the rate ratio.
    Equilibrium,
    /// Damped-cosine frequency of the encoded qubit against R (hamiltonian-3q).
    Coupling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSettings {
    pub mode: ScanMode,
    /// Fit a power law to the scanned points.
    pub fit: bool,
    /// Coupling mode: fit window in leading-order periods `πR²/12`.
    pub periods: f64,
    /// Coupling mode: samples per damped-cosine fit.
    pub fit_samples: usize,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self { mode: ScanMode::Equilibrium, fit: false, periods: 3.0, fit_samples: 3000 }
    }
}

fn default_engine() -> Engine {
    Engine::Full
}
fn default_t_max() -> f64 {
    10.0
}
fn default_samples() -> usize {
    101
}
fn default_n_traj() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(default)]
    pub params: Params,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    /// Horizon in units of the noise rate (γt or λt).
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Trajectories for the monte-carlo engine.
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default)]
    pub cross_validate: bool,
    /// Rate grid for `scan`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: None,
            code: None,
            params: Params::default(),
            engine: default_engine(),
            integrator: IntegratorSettings::default(),
            t_max: default_t_max(),
            samples: default_samples(),
            seed: 0,
            n_traj: default_n_traj(),
            cross_validate: false,
            grid: None,
            scan: None,
            out: None,
        }
    }
}

/// Inline overrides; `None` leaves the file (or default) value alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<String>,
    pub ratio: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub tau_c: Option<f64>,
    pub engine: Option<Engine>,
    pub method: Option<Method>,
    pub t_max: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub n_traj: Option<usize>,
    pub cross_validate: bool,
    pub grid: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn apply(mut self, o: Overrides) -> Self {
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        if o.scenario.is_some() {
            self.scenario = o.scenario;
        }
        // An inline κ or R replaces both file values, so they cannot disagree.
        if o.kappa.is_some() || o.ratio.is_some() {
            self.params.kappa = o.kappa;
            self.params.ratio = o.ratio;
        }
        if o.epsilon.is_some() || o.tau_c.is_some() {
            self.params.epsilon = o.epsilon;
            self.params.tau_c = o.tau_c;
        }
        if o.gamma.is_some() {
            self.params.gamma = o.gamma;
        }
        if o.lambda.is_some() {
            self.params.lambda = o.lambda;
        }
        set!(self.engine, o.engine);
        set!(self.integrator.method, o.method);
        set!(self.t_max, o.t_max);
        set!(self.samples, o.samples);
        set!(self.seed, o.seed);
        set!(self.n_traj, o.n_traj);
        self.cross_validate |= o.cross_validate;
        if o.grid.is_some() {
            self.grid = o.grid;
        }
        if o.out.is_some() {
            self.out = o.out;
        }
        self
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let name = self.scenario.as_deref().ok_or_else(|| CliError::Config("no scenario given".into()))?;
        Scenario::from_name(name).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Fills in every derived rate and checks the combination is runnable.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let scenario = self.scenario()?;
        if let Some(code) = &self.code {
            if code != scenario.code.name() {
                return Err(CliError::Config(format!(
                    "code `{code}` does not match scenario `{}` (uses `{}`)",
                    scenario.name,
                    scenario.code.name()
                )));
            }
        }
        self.code = Some(scenario.code.name().to_string());
        self.resolve_rates(scenario.is_hamiltonian())?;
        self.check_engine(&scenario)?;
        if self.engine == Engine::WeakStep {
            self.resolve_weak_map()?;
        } else if self.params.epsilon.is_some() || self.params.tau_c.is_some() {
            return Err(CliError::Config("epsilon and tau_c apply only to the weak-step engine".into()));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(CliError::Config(format!("t_max must be finite and non-negative, got {}", self.t_max)));
        }
        if self.samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        if self.n_traj == 0 {
            return Err(CliError::Config("n_traj must be at least 1".into()));
        }
        self.integrator_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.model_params().validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(self)
    }

    fn resolve_rates(&mut self, hamiltonian: bool) -> Result<(), CliError> {
        let p = &mut self.params;
        let (rate, unused, rate_name, unused_name) = if hamiltonian {
            (&mut p.gamma, p.lambda, "gamma", "lambda")
        } else {
            (&mut p.lambda, p.gamma, "lambda", "gamma")
        };
        if unused.is_some() {
            return Err(CliError::Config(format!("{unused_name} does not apply to this scenario")));
        }
        let base = *rate.get_or_insert(1.0);
        if !(base > 0.0 && base.is_finite()) {
            return Err(CliError::Config(format!("{rate_name} must be positive, got {base}")));
        }
        let kappa = match (p.kappa, p.ratio) {
            (Some(k), Some(r)) => {
                if (k - r * base).abs() > 1e-12 * k.abs().max(1.0) {
                    return Err(CliError::Config(format!("kappa = {k} disagrees with R = {r} at {rate_name} = {base}")));
                }
                k
            }
            (Some(k), None) => k,
            (None, Some(r)) => r * base,
            (None, None) => return Err(CliError::Config("one of kappa or R is required".into())),
        };
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(CliError::Config(format!("kappa must be finite and non-negative, got {kappa}")));
        }
        p.kappa = Some(kappa);
        p.ratio = Some(kappa / base);
        Ok(())
    }

    fn check_engine(&self, scenario: &Scenario) -> Result<(), CliError> {
        let ok = match self.engine {
            Engine::Full => true,
            Engine::Reduced => scenario.name == "hamiltonian-3q",
            Engine::WeakStep | Engine::MonteCarlo => scenario.is_hamiltonian(),
        };
        if !ok {
            return Err(CliError::Config(format!(
                "engine {:?} is not available for scenario `{}`",
                self.engine, scenario.name
            )));
        }
        if self.cross_validate && !(scenario.name == "hamiltonian-3q" && matches!(self.engine, Engine::Full | Engine::Reduced))
        {
            return Err(CliError::Config(
                "cross-validation compares the full and reduced engines; it needs hamiltonian-3q with one of them".into(),
            ));
        }
        Ok(())
    }

    fn resolve_weak_map(&mut self) -> Result<(), CliError> {
        let p = &mut self.params;
        let (rate, kappa) = (p.gamma.expect("resolved"), p.kappa.expect("resolved"));
        // ε = κ·τ_c; τ_c is given in units of 1/γ.
        let (eps, tau_c) = match (p.epsilon, p.tau_c) {
            (Some(e), Some(t)) => {
                if (e - kappa * t / rate).abs() > 1e-12 {
                    return Err(CliError::Config(format!("epsilon = {e} disagrees with kappa·tau_c = {}", kappa * t / rate)));
                }
                (e, t)
            }
            (None, Some(t)) => (kappa * t / rate, t),
            (Some(e), None) if kappa > 0.0 => (e, e * rate / kappa),
            (Some(_), None) => return Err(CliError::Config("tau_c is required when kappa = 0".into())),
            (None, None) => (kappa * 1e-3 / rate, 1e-3),
        };
        if !(tau_c > 0.0 && tau_c.is_finite()) {
            return Err(CliError::Config(format!("tau_c must be positive, got {tau_c}")));
        }
        if !(0.0..=1.0).contains(&eps) {
            return Err(CliError::Config(format!("epsilon = kappa·tau_c = {eps} must lie in [0, 1]")));
        }
        p.epsilon = Some(eps);
        p.tau_c = Some(tau_c);
        Ok(())
    }

    /// Rates of a resolved config.
    pub fn model_params(&self) -> ModelParams {
        let p = &self.params;
        ModelParams {
            lambda: p.lambda.unwrap_or(0.0),
            gamma: p.gamma.unwrap_or(0.0),
            kappa: p.kappa.unwrap_or(0.0),
            epsilon: p.epsilon,
            tau_c: p.tau_c,
            g: None,
        }
    }

    /// The noise rate that sets the time axis.
    pub fn time_unit(&self) -> f64 {
        self.params.gamma.or(self.params.lambda).unwrap_or(1.0)
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        let s = &self.integrator;
        IntegratorConfig {
            method: s.method,
            rtol: s.rtol,
            atol: s.atol,
            max_step: s.max_step,
            samples: self.samples,
            check_positivity: s.check_positivity,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(scenario: &str) -> ExperimentConfig {
        ExperimentConfig { scenario: Some(scenario.into()), ..Default::default() }
    }

    #[test]
    fn ratio_sets_kappa() {
        let mut cfg = base("hamiltonian-3q");
        cfg.params.gamma = Some(2.0);
        cfg.params.ratio = Some(10.0);
        let cfg = cfg.resolve().unwrap();
        assert_eq!(cfg.params.kappa, Some(20.0));
        assert_eq!(cfg.code.as_deref(), Some("bitflip3"));
        // Resolution is idempotent.
        assert_eq!(cfg.clone().resolve().unwrap(), cfg);
    }

    #[test]
    fn inconsistent_or_missing_rates_are_rejected() {
        let mut cfg = base("markovian-1q");
        cfg.params.kappa = Some(3.0);
        cfg.params.ratio = Some(2.0);
        assert!(cfg.resolve().is_err());
        assert!(base("markovian-1q").resolve().is_err());
        let mut cfg = base("markovian-1q");
        cfg.params.ratio = Some(1.0);
        cfg.params.gamma = Some(1.0);
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn engine_compatibility() {
        for (scenario, engine, ok) in [
            ("hamiltonian-3q", Engine::Reduced, true),
            ("hamiltonian-1q", Engine::Reduced, false),
            ("markovian-1q", Engine::MonteCarlo, false),
            ("hamiltonian-1q", Engine::WeakStep, true),
        ] {
            let mut cfg = base(scenario);
            cfg.params.ratio = Some(5.0);
            cfg.engine = engine;
            assert_eq!(cfg.resolve().is_ok(), ok, "{scenario} {engine:?}");
        }
    }

    #[test]
    fn weak_map_strength_follows_kappa() {
        let mut cfg = base("hamiltonian-1q");
        cfg.params.ratio = Some(5.0);
        cfg.params.tau_c = Some(0.01);
        cfg.engine = Engine::WeakStep;
        let cfg = cfg.resolve().unwrap();
        assert!((cfg.params.epsilon.unwrap() - 0.05).abs() < 1e-15);
        let mut too_strong = cfg.clone();
        too_strong.params.epsilon = None;
        too_strong.params.tau_c = Some(1.0);
        assert!(too_strong.resolve().is_err());
    }

    #[test]
    fn overrides_replace_rate_pairs() {
        let mut cfg = base("hamiltonian-1q");
        cfg.params.kappa = Some(3.0);
        let cfg = cfg.apply(Overrides { ratio: Some(7.0), ..Default::default() }).resolve().unwrap();
        assert_eq!(cfg.params.kappa, Some(7.0));
    }

    #[test]
    fn json_round_trip() {
        let mut cfg = base("hamiltonian-3q");
        cfg.params.ratio = Some(100.0);
        cfg.engine = Engine::Reduced;
        let cfg = cfg.resolve().unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert!(text.contains("\"schema_version\": 1"));
        assert!(text.contains("\"engine\": \"reduced\""));
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"schema_version":1,"bogus":2}"#).is_err());
    }
}
