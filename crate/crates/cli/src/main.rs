//! `qdse`: train reduced-precision networks, estimate their FPGA cost,
//! and explore the precision/topology design space from one binary.

mod cmd;
mod config;
mod data;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdse_core::{Error, Result};

use crate::cmd::Ctx;
use crate::config::FileConfig;

#[derive(Debug, Parser)]
#[command(
    name = "qdse",
    version,
    about = "Quantized design-space exploration: reduced-precision training \
             plus FPGA cost estimation"
)]
struct Cli {
    /// Base RNG seed; everything stochastic derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for artifacts (created if missing; default: .).
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// TOML file mirroring the flags; explicit flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one network at a chosen precision and width scale.
    Train(cmd::train::TrainArgs),
    /// Score a saved checkpoint on a held-out set.
    Eval(cmd::eval::EvalArgs),
    /// Hardware cost/throughput/memory estimates, no training involved.
    Estimate(cmd::estimate::EstimateArgs),
    /// Sweep a precision x scale grid and mark the Pareto frontier.
    Explore(cmd::explore::ExploreArgs),
    /// Recompute the non-dominated frontier of saved results.
    Pareto(cmd::pareto::ParetoArgs),
    /// Render saved results as SVG scatter plots with data sidecars.
    Plot(cmd::plot::PlotArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version exit 0; real parse errors are usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_class(&e))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let out_dir = cli
        .out_dir
        .or_else(|| file.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;
    let ctx = Ctx { seed, out_dir, file };
    match cli.command {
        Command::Train(args) => cmd::train::run(args, &ctx),
        Command::Eval(args) => cmd::eval::run(args, &ctx),
        Command::Estimate(args) => cmd::estimate::run(args, &ctx),
        Command::Explore(args) => cmd::explore::run(args, &ctx),
        Command::Pareto(args) => cmd::pareto::run(args, &ctx),
        Command::Plot(args) => cmd::plot::run(args, &ctx),
    }
}

/// 1 usage, 2 data, 3 compute.
fn exit_class(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::UnknownPrecision(_) => 1,
        Error::Io(_) | Error::DataFormat(_) | Error::VersionMismatch { .. } | Error::Shape(_) => 2,
        Error::Compute(_) => 3,
    }
}
