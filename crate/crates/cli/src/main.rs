//! `peakon`: run peakon simulations, single-peakon sweeps, two-peakon
//! classification, wave-breaking checks and field runs from a JSON config.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{RunContext, Status};
use config::{load_config, ConfigError};

#[derive(Parser)]
#[command(name = "peakon", version, about = "Multi-peakon dynamics for fg-family equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parameter sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Merge colliding peakons and keep integrating instead of stopping.
    #[arg(long, global = true)]
    continue_through_collisions: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Integrate the peakon system; writes trajectory.csv, events.json and invariants.csv.
    Simulate,
    /// Single-peakon travelling-wave test over an amplitude sweep; writes single.csv.
    Single,
    /// Two-peakon regime of the initial pair; writes regime.json.
    Classify2,
    /// Wave-breaking coefficients, plus an indicator series when a field section is given.
    Breakcheck,
    /// Pseudo-spectral run for smooth data; writes field.csv and field_summary.json.
    Field,
    /// Recompute invariants from a trajectory CSV; writes invariants.csv.
    Invariants,
}

fn run(cli: &Cli) -> anyhow::Result<Status> {
    let path = cli.config.as_ref().ok_or_else(|| ConfigError::at("--config", "a config file is required"))?;
    let cfg = load_config(path)?;
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    let out = match (&cli.out, &cfg.out_dir) {
        (Some(dir), _) => dir.clone(),
        (None, Some(dir)) => base.join(dir),
        (None, None) => PathBuf::from("."),
    };
    std::fs::create_dir_all(&out)?;
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(ConfigError::at("--jobs", "must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let ctx = RunContext { cfg, base, out, continue_through_collisions: cli.continue_through_collisions };
    match cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::Single => commands::single(&ctx),
        Command::Classify2 => commands::classify2(&ctx),
        Command::Breakcheck => commands::breakcheck(&ctx),
        Command::Field => commands::field(&ctx),
        Command::Invariants => commands::invariants(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            if let Some(ce) = e.downcast_ref::<ConfigError>() {
                eprintln!("{ce}");
                ExitCode::from(1)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(4)
            }
        }
    }
}
