use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use klms::cli::{compare_theory, run_experiment, CliError};

/// Kernel least mean square experiments.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write CSV artifacts.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// key=value, applied after the config file
        #[arg(long = "override", value_name = "K=V")]
        overrides: Vec<String>,
    },
    /// Compare simulated steady-state EMSE with the theoretical value.
    Theory {
        config: PathBuf,
        #[arg(long = "override", value_name = "K=V")]
        overrides: Vec<String>,
    },
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("KLMS_THREADS") {
        let n: usize = v.parse().with_context(|| format!("KLMS_THREADS={v:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let outcome: Result<(), CliError> = match args.command {
        Command::Run {
            config,
            out,
            overrides,
        } => run_experiment(&config, &overrides, &out).map(|m| {
            for path in &m.artifacts {
                println!("{}", path.display());
            }
            eprintln!("done in {:.2}s", m.duration_secs);
        }),
        Command::Theory { config, overrides } => {
            compare_theory(&config, &overrides).map(|report| print!("{report}"))
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
