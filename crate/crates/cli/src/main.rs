//! `jpa-forge`: transformer sweeps, gain sweeps, noise fits and design
//! optimization for impedance-matched Josephson parametric amplifiers.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] jpa_forge::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("no feasible design: {0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use jpa_forge::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(E::DegenerateFit(_)) => 4,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(E::NoBandwidth { .. }) => 3,
            CliError::Core(_) => 2,
            CliError::Infeasible(_) => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Curves as CSV next to a JSON report.
    Csv,
    /// Everything in the JSON report.
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "jpa-forge", version, about = "Josephson parametric amplifier design toolkit")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV and JSON outputs.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; defaults to the number of logical processors.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for the optimizer's initial simplex.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Impedance transformation ratio of the Ruthroff transformer.
    Transformer {
        /// Lowest frequency, GHz.
        #[arg(long)]
        fmin: Option<f64>,
        /// Highest frequency, GHz.
        #[arg(long)]
        fmax: Option<f64>,
        /// Number of grid points.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Reflection gain over the configured grid, with metrics.
    Gain,
    /// Fit gain and system noise temperature to hot/cold-load data.
    NoiseFit {
        /// CSV with columns temperature_K,psd_K[,weight].
        datafile: PathBuf,
        /// Signal frequency, GHz. Falls back to the sidecar `<datafile>.json`.
        #[arg(long)]
        freq_ghz: Option<f64>,
        /// Factor converting the psd column to kelvin. Default 1.
        #[arg(long)]
        psd_scale: Option<f64>,
    },
    /// Optimize the configured parameter box for flat gain.
    Optimize,
    /// Sweep one parameter and report metrics per value.
    Sweep,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("JPA_FORGE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jpa-forge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size worker pool: {e}")))?;
    }
    std::fs::create_dir_all(&cli.out_dir)?;
    let ctx = commands::Context {
        out_dir: cli.out_dir,
        seed: cli.seed,
        format: cli.format,
        started: std::time::Instant::now(),
    };
    let load = || -> Result<config::RunConfig, CliError> {
        let path = cli
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("this subcommand needs --config <path>".into()))?;
        config::RunConfig::load(path)
    };
    match cli.command {
        Command::Transformer { fmin, fmax, points } => commands::transformer(&ctx, &load()?, fmin, fmax, points),
        Command::Gain => commands::gain(&ctx, &load()?),
        Command::NoiseFit {
            datafile,
            freq_ghz,
            psd_scale,
        } => commands::noise_fit(&ctx, &datafile, freq_ghz, psd_scale),
        Command::Optimize => commands::optimize(&ctx, &load()?),
        Command::Sweep => commands::sweep(&ctx, &load()?),
    }
}
