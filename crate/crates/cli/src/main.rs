//! `cqec`: command-line driver for the continuous error-correction simulator.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cqec_core::dynamics::Method;
use config::{Engine, ExperimentConfig, Overrides, ScanMode, ScanSettings};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cqec", version, about = "Continuous quantum error correction of bit-flip noise")]
struct Cli {
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one scenario and write F_cw, P_cs and Λ as CSV.
    Simulate(RunArgs),
    /// Regenerate the datasets behind a figure (1, 3 or 4).
    Fig {
        id: u32,
        /// Directory for the CSV files.
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Eigenvalues of the reduced model matched against the closed forms.
    Eig(RunArgs),
    /// Equilibrium infidelity or effective coupling over a grid of rates.
    Scan {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        mode: Option<ScanMode>,
        /// Fit a power law and write `<out>.fit.json`.
        #[arg(long)]
        fit: bool,
    },
    /// Transition graph of the reduced model as JSON.
    Graph {
        #[arg(long = "R", default_value_t = 100.0)]
        ratio: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    /// κ over the noise rate.
    #[arg(long = "R")]
    ratio: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum)]
    engine: Option<Engine>,
    /// adaptive-rk, fixed-rk4 or spectral.
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Horizon in units of the noise rate.
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_traj: Option<usize>,
    /// Weak-map interval in units of the inverse noise rate.
    #[arg(long)]
    tau_c: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated rate grid for scans.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also run the other exact engine and require agreement.
    #[arg(long)]
    cross_validate: bool,
}

fn parse_method(s: &str) -> Result<Method, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown method `{s}` (adaptive-rk, fixed-rk4, spectral)"))
}

impl RunArgs {
    fn into_config(self, default_scenario: Option<&str>) -> Result<ExperimentConfig, CliError> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let mut cfg = base.apply(Overrides {
            scenario: self.scenario,
            ratio: self.ratio,
            kappa: self.kappa,
            gamma: self.gamma,
            lambda: self.lambda,
            epsilon: self.epsilon,
            tau_c: self.tau_c,
            engine: self.engine,
            method: self.method,
            t_max: self.t_max,
            samples: self.samples,
            seed: self.seed,
            n_traj: self.n_traj,
            cross_validate: self.cross_validate,
            grid: self.grid,
            out: self.out,
        });
        if cfg.scenario.is_none() {
            cfg.scenario = default_scenario.map(String::from);
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    match cli.command {
        Command::Simulate(args) => {
            simulate::simulate(&args.into_config(None)?.resolve()?)?;
        }
        Command::Fig { id, out_dir } => {
            for path in simulate::figure(id, &out_dir)? {
                eprintln!("wrote {}", path.display());
            }
        }
        Command::Eig(args) => {
            commands::eig(&args.into_config(Some("hamiltonian-3q"))?.resolve()?)?;
        }
        Command::Scan { run, mode, fit } => {
            let mut cfg = run.into_config(None)?;
            let settings = cfg.scan.get_or_insert_with(ScanSettings::default);
            if let Some(mode) = mode {
                settings.mode = mode;
            }
            settings.fit |= fit;
            let outcome = commands::scan(&commands::resolve_scan(cfg)?)?;
            log::info!("scanned {} points", outcome.table.rows.len());
            if let Some(f) = outcome.fit {
                eprintln!("slope = {:.6} ± {:.6}", f.param("slope"), f.error("slope"));
            }
        }
        Command::Graph { ratio, out } => {
            commands::graph(ratio, out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cqec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
