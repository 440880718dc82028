#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "liesynth",
    version,
    about = "Control schedule synthesis on compact matrix Lie groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
pub struct Common {
    /// Job configuration (JSON).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Built-in system used as the base config: su2 or so4.
    #[arg(long, value_name = "NAME")]
    pub fixture: Option<String>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for the randomized similarity scan; overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Close the generators into a basis of their Lie algebra.
    Close(Common),
    /// Synthesize a schedule reaching the target.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Overrides `method` in the config.
        #[arg(long, value_parser = ["exact", "trotter", "combined"])]
        method: Option<String>,
        /// Overrides `n` in the config.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Error versus iteration count for the configured method.
    Errcurve {
        #[command(flatten)]
        common: Common,
        /// Overrides `method` in the config: trotter or combined.
        #[arg(long, value_parser = ["trotter", "combined"])]
        method: Option<String>,
        /// Comma-separated iteration counts; overrides `ns` in the config.
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<u64>>,
    },
    /// Errors of the bracket method and the combined method side by side.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<u64>>,
    },
    /// Replace negative durations in a schedule by nonnegative ones.
    FixTimes {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        schedule: PathBuf,
        /// Period count; read from a sibling report.json when omitted.
        #[arg(long)]
        repeats: Option<u64>,
        /// Overrides `eps_timefix` in the config.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Multiply out a schedule and compare it with the target.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        schedule: PathBuf,
        #[arg(long)]
        repeats: Option<u64>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<liesynth::Error> for CliError {
    fn from(e: liesynth::Error) -> Self {
        use liesynth::Error as E;
        let code = match e {
            E::InvalidInput(_) | E::Io(_) | E::Json(_) | E::Csv(_) => 2,
            E::TargetUnreachable(_) | E::ResidualTooLarge(_) => 3,
            E::SearchBudgetExceeded { .. }
            | E::MNotFound { .. }
            | E::NoConvergence { .. }
            | E::ExhaustedCandidates { .. } => 4,
            E::BranchPoint(_) => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Close(common) => commands::close(&common),
        Command::Synth { common, method, n } => commands::synth(&common, method.as_deref(), n),
        Command::Errcurve { common, method, ns } => {
            commands::errcurve(&common, method.as_deref(), ns)
        }
        Command::Compare { common, ns } => commands::compare(&common, ns),
        Command::FixTimes {
            common,
            schedule,
            repeats,
            eps,
        } => commands::fix_times(&common, &schedule, repeats, eps),
        Command::Verify {
            common,
            schedule,
            repeats,
        } => commands::verify(&common, &schedule, repeats),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LIESYNTH_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
