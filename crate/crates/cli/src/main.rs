mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Polar wiretap codes: construction, coding, simulation and reports.
///
/// Exit codes: 0 success, 1 other failure, 2 configuration error,
/// 3 constraint violation, 4 resource guard tripped.
#[derive(Debug, Parser)]
#[command(name = "wiretap-polar", version)]
struct Cli {
    /// Worker threads for Monte Carlo and construction (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Main,
    Wiretap,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build quality tables and write the code spec.
    Construct {
        #[arg(long)]
        config: PathBuf,
    },
    /// Encode packed message bits into packed codeword bits.
    Encode {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Seed the randomization bits. INSECURE: the seed reveals them.
        #[arg(long, requires = "allow_insecure_seed")]
        insecure_seed: Option<u64>,
        /// Required together with --insecure-seed; for tests only.
        #[arg(long)]
        allow_insecure_seed: bool,
    },
    /// Decode packed channel symbols into packed message bits.
    Decode {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Use multi-path decoding with at most this many paths.
        #[arg(long)]
        max_paths: Option<usize>,
    },
    /// Pass packed codeword bits through the main or wiretap channel of a
    /// spec, writing packed symbols.
    Transmit {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "main")]
        channel: Which,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo block-error rate of Bob's decoder against its bound.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Monte Carlo of Eve's genie-aided recovery of the random bits.
    Attack {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the exact-oracle invariant suites.
    Verify {
        /// Skip the n = 8 leakage grid.
        #[arg(long)]
        quick: bool,
    },
    /// Secrecy-rate table over the configured wiretap sweep.
    Report {
        #[arg(long)]
        config: PathBuf,
        /// Add a Monte Carlo block-error rate to every row.
        #[arg(long)]
        simulate: bool,
    },
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn constraint(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }

    pub fn other(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<wiretap_polar::Error> for CliError {
    fn from(e: wiretap_polar::Error) -> Self {
        use wiretap_polar::Error as E;
        let code = match &e {
            E::InvalidParameter(_)
            | E::RowSum { .. }
            | E::NotPowerOfTwo(_)
            | E::NotSymmetric(_)
            | E::Json(_) => 2,
            E::DegradationViolation(_) | E::DeltaOutOfWindow { .. } | E::Inconsistent(_) => 3,
            E::TooLarge { .. } => 4,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::other(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(w) = cli.workers {
        commands::set_workers(w)?;
    }
    match cli.command {
        Command::Construct { config } => commands::construct(&config),
        Command::Encode {
            spec,
            input,
            output,
            insecure_seed,
            allow_insecure_seed,
        } => commands::encode(&spec, &input, &output, insecure_seed, allow_insecure_seed),
        Command::Decode {
            spec,
            input,
            output,
            max_paths,
        } => commands::decode(&spec, &input, &output, max_paths),
        Command::Transmit {
            spec,
            input,
            output,
            channel,
            seed,
        } => commands::transmit(&spec, &input, &output, channel, seed),
        Command::Simulate { config } => commands::simulate(&config, cli.workers.is_some()),
        Command::Attack { config } => commands::attack(&config, cli.workers.is_some()),
        Command::Verify { quick } => commands::verify(quick),
        Command::Report { config, simulate } => {
            commands::report(&config, simulate, cli.workers.is_some())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
