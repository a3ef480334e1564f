//! `dephasim`: scenario runner for the detector-decoherence simulator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime/numeric
//! error, 4 i/o error.

mod config;
mod output;
mod scenario;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use config::ScenarioKind;
use scenario::RunError;

#[derive(Parser)]
#[command(
    name = "dephasim",
    version,
    about = "Simulates a double-dot charge qubit monitored by a two-barrier point-contact detector"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the scenario configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `out`; default `.`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides the config's `seed`; default 0).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Damping, induced energy shift, and direction asymmetries.
    Influence(RunArgs),
    /// Integrate the polarization-vector equation of motion.
    Evolve(RunArgs),
    /// Exact count distributions and window correlations.
    Counts(RunArgs),
    /// Monte Carlo telegraph-signal runs and empirical comparisons.
    Simulate(RunArgs),
    /// Fringe phase shift and contrast at a detector voltage.
    Fringe(RunArgs),
    /// Map another scenario over a parameter axis.
    Sweep(RunArgs),
}

impl Command {
    fn kind(&self) -> ScenarioKind {
        match self {
            Command::Influence(_) => ScenarioKind::Influence,
            Command::Evolve(_) => ScenarioKind::Evolve,
            Command::Counts(_) => ScenarioKind::Counts,
            Command::Simulate(_) => ScenarioKind::Simulate,
            Command::Fringe(_) => ScenarioKind::Fringe,
            Command::Sweep(_) => ScenarioKind::Sweep,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Influence(args)
            | Command::Evolve(args)
            | Command::Counts(args)
            | Command::Simulate(args)
            | Command::Fringe(args)
            | Command::Sweep(args) => args,
        }
    }
}

fn configure_threads() -> Result<(), RunError> {
    match std::env::var("DEPHASIM_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let threads: usize = raw.parse().map_err(|_| {
                RunError::Config(crate::config::ConfigError {
                    line: None,
                    message: format!(
                        "DEPHASIM_THREADS: expected a nonnegative integer, got `{raw}`"
                    ),
                })
            })?;
            if threads == 0 {
                return Ok(());
            }
            // Ignore "already built": the default pool only exists if
            // someone raced us, which cannot happen this early in main.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), RunError> {
    configure_threads()?;
    let args = cli.command.args();

    let config_text = std::fs::read_to_string(&args.config)
        .map_err(|e| RunError::Io(format!("reading {}: {e}", args.config.display())))?;
    let parsed = config::parse_config(&config_text).map_err(RunError::Config)?;
    if parsed.kind() != cli.command.kind() {
        return Err(RunError::Config(crate::config::ConfigError {
            line: None,
            message: format!(
                "subcommand `{}` does not match `scenario = {}` in {}",
                cli.command.kind(),
                parsed.kind(),
                args.config.display()
            ),
        }));
    }

    let seed = match args.seed {
        Some(seed) => seed,
        None => parsed.seed().map_err(RunError::Config)?.unwrap_or(0),
    };
    let out_dir = args
        .out
        .clone()
        .or_else(|| parsed.out_dir().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let files = scenario::run_scenario(&parsed, &config_text, &out_dir, seed)?;
    for file in &files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("dephasim: {error}");
            ExitCode::from(match error {
                RunError::Config(_) => 2,
                RunError::Runtime(_) => 3,
                RunError::Io(_) => 4,
            })
        }
    }
}
