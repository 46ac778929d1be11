//! `seamqec`: threshold sweeps, decoder checks and interconnect rate tables.
//!
//! Exit codes: 0 success, 1 runtime error, 2 bad configuration or
//! arguments, 3 a threshold sweep found no crossing, 4 the decoder
//! disagreed with an exact oracle.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use seamqec_core::rates::{CapSource, PaaSource};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no threshold crossing: {0}")]
    NoCrossing(String),
    #[error("decoder disagrees with the exact oracle: {0}")]
    OracleMismatch(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::NoCrossing(_) => 3,
            CliError::OracleMismatch(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "seamqec", version, about = "Surface-code seam thresholds and interconnect rates")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON parameter file for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed. A random seed is drawn and recorded when absent.
    #[arg(long, global = true, env = "SEAMQEC_SEED")]
    seed: Option<u64>,
    /// Worker threads for shot sampling [default: available cores].
    #[arg(long, global = true, env = "SEAMQEC_WORKERS", value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Format of the output tables. The manifest is always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CapArg {
    Table,
    Prose,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PaaArg {
    Printed,
    Efficiencies,
}

#[derive(Debug, Args)]
struct RateArgs {
    /// Which attempt-rate cap applies once optical modes saturate.
    #[arg(long, value_enum)]
    cap: Option<CapArg>,
    /// Success probability per attempt: the quoted value or one computed
    /// from the efficiencies.
    #[arg(long = "p-aa", value_enum)]
    p_aa: Option<PaaArg>,
}

impl RateArgs {
    fn apply(&self, options: &mut seamqec_core::rates::RateOptions) {
        if let Some(cap) = self.cap {
            options.cap = match cap {
                CapArg::Table => CapSource::Table,
                CapArg::Prose => CapSource::Prose,
            };
        }
        if let Some(p) = self.p_aa {
            options.p_aa = match p {
                PaaArg::Printed => PaaSource::Printed,
                PaaArg::Efficiencies => PaaSource::Efficiencies,
            };
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Locate thresholds along rays through the error-rate space.
    Threshold {
        /// Built-in sweep, used when no --config is given.
        #[arg(long, value_enum)]
        preset: Option<config::Preset>,
        /// Fixed shots per point, overriding the budget.
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Estimate failure rates on a grid of error rates and distances.
    Sweep {
        /// Sweep the grid of a built-in threshold preset.
        #[arg(long, value_enum)]
        preset: Option<config::Preset>,
        /// Fixed shots per point, overriding the budget.
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Bell-pair rates, cycle times and gate times per design.
    Rates {
        /// Restrict to these designs (lens, single_cavity, cavity_array).
        #[arg(long)]
        design: Vec<String>,
        /// Code distance.
        #[arg(long = "L")]
        distance: Option<usize>,
        /// Communication qubits; repeat for several.
        #[arg(long = "N")]
        n: Vec<f64>,
        #[command(flatten)]
        rate: RateArgs,
    },
    /// Flip-rate coefficients of every region preset, printed and exact.
    DeriveNoise,
    /// Compare the matcher with exact oracles on sampled or dumped shots.
    DecodeCheck {
        /// Shot dump to check instead of sampling fresh shots.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Number of shots to sample.
        #[arg(long)]
        shots: Option<u64>,
        /// Also write the sampled shots as a dump.
        #[arg(long)]
        write_dump: bool,
    },
    /// Bell rate against communication-qubit count.
    Fig3 {
        #[command(flatten)]
        rate: RateArgs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Threshold { .. } => "threshold",
            Command::Sweep { .. } => "sweep",
            Command::Rates { .. } => "rates",
            Command::DeriveNoise => "derive-noise",
            Command::DecodeCheck { .. } => "decode-check",
            Command::Fig3 { .. } => "fig3",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let started_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let workers = match cli.global.workers {
        Some(w) => w as usize,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Other(e.into()))?;
    std::fs::create_dir_all(&cli.global.out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", cli.global.out.display())))?;

    let mut out = commands::Output::new(cli.global.out.clone(), cli.global.format);
    let name = cli.command.name();
    let outcome = commands::dispatch(cli.command, &cli.global, &mut out)?;
    out.manifest(name, outcome, workers, started_unix_s, started.elapsed().as_secs_f64())
}
