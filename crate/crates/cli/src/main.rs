//! `phasesynth`: inspect states, run measurement simulations and check the
//! built-in invariants.

mod simulate;
mod states;
mod validate;

use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

/// Caps the worker threads used by simulations.
const THREADS_ENV: &str = "PHASESYNTH_THREADS";

#[derive(Parser)]
#[command(name = "phasesynth", version, about = "Canonical phase measurement by multiport projection synthesis")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the number-state amplitudes and phase distribution of a state.
    States(states::StatesArgs),
    /// Run a reference-phase sweep and write points, curve and summary.
    Simulate(simulate::SimulateArgs),
    /// Run the built-in invariant checks.
    Validate(validate::ValidateArgs),
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().with_context(|| format!("{THREADS_ENV}={raw:?} is not a thread count"))?;
    if n == 0 {
        bail!("{THREADS_ENV} must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    log::info!("using {n} worker threads");
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    configure_threads()?;
    match cli.command {
        Command::States(args) => states::run(&args).map(|_| ExitCode::SUCCESS),
        Command::Simulate(args) => simulate::run(&args).map(|_| ExitCode::SUCCESS),
        Command::Validate(args) => validate::run(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
