//! Config-driven command line for the rholab experiment suite.
//!
//! Every subcommand reads a TOML config (see `configs/` for shipped
//! examples), writes a structured report plus CSV tables into the output
//! directory, and exits with 0 when all expectations stated in the config
//! hold, 1 on an assertion failure, 2 on a configuration error.

use clap::{Parser, Subcommand};
use rholab::config::{self, SweepFileConfig};
use rholab::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rholab", version, about = "numerical experiments for critical-radius adapted harmonic analysis")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports and CSV tables.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the number of refinement levels in the config.
    #[arg(long, global = true)]
    refine: Option<usize>,

    /// Rayon worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the two-sided variation bound of a critical radius function.
    VerifyRho,
    /// Evaluate the sup-formula critical radius of a potential (d = 3).
    ShenRho,
    /// Greedy critical covering with overlap statistics.
    Covering,
    /// Estimate one weight-class characteristic constant.
    WeightConstant,
    /// Run the weight-class relation suite on the standard bench.
    Relations,
    /// Weighted stopping-time decomposition on the configured box.
    Cz,
    /// Kernel condition checks (size/smoothness, pointwise and annulus).
    KernelCheck,
    /// Evaluate a maximal operator and export values plus witnesses.
    Maximal,
    /// Mixed weak-type sweep over the level ladder.
    Sweep,
    /// Search the penalty exponent ladder for a stable sweep.
    SigmaSearch,
    /// Exponent bookkeeping for the operator family of a potential.
    Exponents,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("assertion failure: an expectation stated in the config does not hold");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Io(_) | Error::Parse(_) | Error::InvalidParameter(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> rholab::Result<bool> {
    std::fs::create_dir_all(&cli.out)?;
    let config_path = || -> rholab::Result<&PathBuf> {
        cli.config
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("--config is required".into()))
    };
    match &cli.command {
        Command::VerifyRho => {
            let mut cfg: config::VerifyRhoConfig = config::load(config_path()?)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            config::run_verify_rho(&cfg, &cli.out)
        }
        Command::ShenRho => {
            let cfg: config::ShenRhoConfig = config::load(config_path()?)?;
            config::run_shen_rho(&cfg, &cli.out)
        }
        Command::Covering => {
            let cfg: config::CoveringConfig = config::load(config_path()?)?;
            config::run_covering(&cfg, &cli.out)
        }
        Command::WeightConstant => {
            let mut cfg: config::WeightConstantConfig = config::load(config_path()?)?;
            if let Some(r) = cli.refine {
                cfg.refine = r;
            }
            config::run_weight_constant(&cfg, &cli.out)
        }
        Command::Relations => {
            let cfg: config::RelationsConfig = config::load(config_path()?)?;
            config::run_relations(&cfg, &cli.out)
        }
        Command::Cz => {
            let cfg: config::CzConfig = config::load(config_path()?)?;
            config::run_cz(&cfg, &cli.out)
        }
        Command::KernelCheck => {
            let mut cfg: config::KernelCheckConfig = config::load(config_path()?)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            config::run_kernel_check(&cfg, &cli.out)
        }
        Command::Maximal => {
            let cfg: config::MaximalConfig = config::load(config_path()?)?;
            config::run_maximal(&cfg, &cli.out)
        }
        Command::Sweep => {
            let mut cfg: SweepFileConfig = config::load(config_path()?)?;
            if let Some(s) = cli.seed {
                cfg.experiment.seed = s;
            }
            if let Some(r) = cli.refine {
                cfg.experiment.refine_levels = r;
            }
            config::run_sweep_cmd(&cfg, &cli.out)
        }
        Command::SigmaSearch => {
            let mut cfg: SweepFileConfig = config::load(config_path()?)?;
            if let Some(r) = cli.refine {
                cfg.experiment.refine_levels = r;
            }
            config::run_sigma_search_cmd(&cfg, &cli.out)
        }
        Command::Exponents => {
            let cfg: config::ExponentsConfig = config::load(config_path()?)?;
            config::run_exponents(&cfg, &cli.out)
        }
    }
}
