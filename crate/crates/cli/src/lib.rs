//! Command-line front end: invariant self-test, bound evaluation, dominance
//! experiments, decoupling estimates and fixture validation.

pub mod config;
pub mod report;
mod selftest;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tensor_hw::ensembles::{Ensemble, SeedPolicy};
use tensor_hw::verify::{
    estimate_decoupling, evaluate_bounds, run_dominance_experiment, CouplingKernel, DecouplingReport, ProductKernel,
    Verdict,
};

pub use config::{ExperimentConfig, Overrides};
pub use selftest::{selftest, InvariantResult, SelftestOutcome};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_REFUSAL: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] tensor_hw::Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(_) | CliError::Other(_) => EXIT_OTHER,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tensor-hw", version, about = "Tensor Hanson-Wright bounds and Monte Carlo checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override master_seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Override the number of evaluation trials.
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<usize>,
    /// Override the report directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the seeded invariant suite.
    Selftest {
        /// Tensor fixture that must parse before the suite runs.
        #[arg(long, value_name = "PATH")]
        fixture: Option<PathBuf>,
    },
    /// Evaluate bounds on the grid without drawing tails.
    Bound,
    /// Compare empirical tails with the evaluated bounds.
    Experiment,
    /// Estimate the decoupling constant.
    Decouple,
    /// Tensor fixture utilities.
    Fixture {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum FixtureAction {
    /// Parse a fixture and print its shape.
    Validate { path: PathBuf },
}

/// Outcome of a command: exit code plus the files it wrote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub written: Vec<PathBuf>,
}

impl Outcome {
    fn new(code: i32, written: Vec<PathBuf>) -> Self {
        Self { code, written }
    }
}

fn load_config(global: &GlobalArgs) -> Result<ExperimentConfig, CliError> {
    let path = global.config.as_deref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply(&Overrides { seed: global.seed, trials: global.trials, out: global.out.clone() });
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_selftest(global: &GlobalArgs, fixture: Option<&Path>) -> Result<Outcome, CliError> {
    let outcome = selftest(global.seed.unwrap_or(0), fixture)?;
    for l in &outcome.lines {
        println!("{l}");
    }
    println!("digest {}", outcome.digest);
    for r in outcome.results.iter().filter(|r| !r.passed) {
        eprintln!("violated invariant: {}", r.name);
    }
    Ok(Outcome::new(if outcome.passed() { EXIT_PASS } else { EXIT_VIOLATION }, Vec::new()))
}

pub fn cmd_bound(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let report = evaluate_bounds(&cfg.dominance)?;
    let refused = !report.assumptions_ok || report.rows.iter().any(|r| r.bound.is_none());
    let json = report::to_json("bound", cfg, &report)?;
    let written = report::write_pair(&cfg.output_dir(), &format!("{}_bound", cfg.output.stem), &json, &report::bound_csv(&report))?;
    Ok(Outcome::new(if refused { EXIT_REFUSAL } else { EXIT_PASS }, written.to_vec()))
}

pub fn cmd_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let report = run_dominance_experiment(&cfg.dominance)?;
    let json = report::to_json("experiment", cfg, &report)?;
    let written = report::write_pair(&cfg.output_dir(), &cfg.output.stem, &json, &report::dominance_csv(&report))?;
    let code = if report.count(Verdict::Violation) > 0 {
        EXIT_VIOLATION
    } else if report.count(Verdict::Refused) > 0 {
        EXIT_REFUSAL
    } else {
        EXIT_PASS
    };
    Ok(Outcome::new(code, written.to_vec()))
}

pub fn decouple(cfg: &ExperimentConfig) -> Result<DecouplingReport, CliError> {
    let d = cfg.decoupling.as_ref().ok_or_else(|| CliError::Config("missing [decoupling] section".into()))?;
    let ensemble = Ensemble::new(cfg.dominance.ensemble.clone())?;
    let seeds = SeedPolicy::new(cfg.dominance.master_seed);
    let report = match d.kernel {
        config::KernelChoice::Product => {
            estimate_decoupling(&ensemble, &ProductKernel { order: d.order }, d.k, &d.theta_grid, d.trials, &seeds)?
        }
        config::KernelChoice::Coupling => {
            let block = cfg.dominance.block.as_ref().ok_or_else(|| CliError::Config("coupling kernel needs a block".into()))?;
            let kernel = CouplingKernel(block.build(&ensemble)?);
            estimate_decoupling(&ensemble, &kernel, d.k, &d.theta_grid, d.trials, &seeds)?
        }
    };
    Ok(report)
}

pub fn cmd_decouple(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let report = decouple(cfg)?;
    let json = report::to_json("decouple", cfg, &report)?;
    let written = report::write_pair(
        &cfg.output_dir(),
        &format!("{}_decoupling", cfg.output.stem),
        &json,
        &report::decoupling_csv(&report),
    )?;
    let code = if report.d_hat.is_some() { EXIT_PASS } else { EXIT_VIOLATION };
    Ok(Outcome::new(code, written.to_vec()))
}

pub fn cmd_fixture_validate(path: &Path) -> Result<Outcome, CliError> {
    let t = tensor_hw::tensor::fixture::read_fixture::<f64>(path)
        .map_err(|e| CliError::Config(format!("fixture {}: {e}", path.display())))?;
    println!("ok {} shape {}", path.display(), t.shape());
    Ok(Outcome::new(EXIT_PASS, Vec::new()))
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Selftest { fixture } => cmd_selftest(&cli.global, fixture.as_deref()),
        Command::Fixture { action: FixtureAction::Validate { path } } => cmd_fixture_validate(path),
        Command::Bound => cmd_bound(&load_config(&cli.global)?),
        Command::Experiment => cmd_experiment(&load_config(&cli.global)?),
        Command::Decouple => cmd_decouple(&load_config(&cli.global)?),
    }
}

/// Run a parsed command and map the result to a process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = match cli.global.threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Other(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(cli))),
        None => dispatch(cli),
    };
    match result {
        Ok(outcome) => {
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
