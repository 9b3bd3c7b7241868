use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use metriplectic_cli::commands::{self, CompareArgs, SimulateArgs, VerifyArgs};

/// Simulate, verify, and compare Poisson, contact Hamiltonian, and
/// metriplectic flows on the one-jet bundle.
#[derive(Parser)]
#[command(name = "metriplectic", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured system and write the monitored trajectory.
    Simulate {
        /// Run configuration (TOML).
        config: PathBuf,
        /// Override the output path from the config.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override the output format: csv or json.
        #[arg(long)]
        format: Option<String>,
        /// Invariant slack; defaults to 10x the integrator tolerance.
        #[arg(long)]
        slack: Option<f64>,
        /// Fan a parameter grid across workers: name=start:stop:count.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Run the identity suite for the configured formalism and emit a
    /// JSON report.
    Verify {
        /// Run configuration (TOML).
        config: PathBuf,
        /// Seed for the randomized checks.
        #[arg(long)]
        seed: Option<u64>,
        /// Sample count per identity.
        #[arg(long)]
        samples: Option<usize>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Integrate the contact and metriplectic realizations of the same
    /// Hamiltonian and emit the per-sample comparison.
    Compare {
        /// Run configuration (TOML).
        config: PathBuf,
        /// Output path for the comparison table.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Output format: csv or json.
        #[arg(long)]
        format: Option<String>,
        /// Allowed (q,p) divergence between the two realizations.
        #[arg(long)]
        slack: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate {
            config,
            output,
            format,
            slack,
            sweep,
        } => commands::simulate(
            &config,
            &SimulateArgs {
                output,
                format,
                slack,
                sweep,
            },
        ),
        Command::Verify {
            config,
            seed,
            samples,
            output,
        } => commands::verify(
            &config,
            &VerifyArgs {
                seed,
                samples,
                output,
            },
        ),
        Command::Compare {
            config,
            output,
            format,
            slack,
        } => commands::compare(
            &config,
            &CompareArgs {
                output,
                format,
                slack,
            },
        ),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::EXIT_ERROR as u8)
        }
    }
}
