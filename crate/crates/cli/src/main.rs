use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(viscobound::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn from_core(e: viscobound::Error) -> Self {
        CliError::Core(e)
    }

    fn exit_code(&self) -> u8 {
        use viscobound::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                E::InvalidParameter(_)
                | E::Domain(_)
                | E::ModelMismatch(_)
                | E::SideMismatch { .. }
                | E::DegenerateContrast { .. }
                | E::Configuration(_) => 2,
                E::Infeasible(_) => 3,
                E::Inconsistent(_) | E::Numerical(_) => 4,
            },
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(name = "viscobound", version, about = "Time-domain bounds for two-phase viscoelastic composites")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (a directory for `domain`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Multiplies every discretization default.
    #[arg(long, global = true, default_value_t = 1.0)]
    grid_scale: f64,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Lower and upper bounds over the time grid.
    Bounds,
    /// Attainable response domains, one frame per time.
    Domain,
    /// Support function of the homogenized kernel over a fan of directions.
    Kernel,
    /// Volume-fraction interval consistent with measured responses.
    Invert,
    /// Supports of responses correlated across several times.
    Correlate,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = cli.config.as_deref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let out = cli.out.as_deref().ok_or_else(|| CliError::Config("--out is required".into()))?;
    if !(cli.grid_scale > 0.0 && cli.grid_scale.is_finite()) {
        return Err(CliError::Config(format!("--grid-scale must be positive, got {}", cli.grid_scale)));
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    let loaded = config::load(config)?;
    match cli.command {
        Command::Bounds => commands::bounds(&loaded, out, cli.grid_scale),
        Command::Domain => commands::domain(&loaded, out, cli.grid_scale),
        Command::Kernel => commands::kernel(&loaded, out, cli.grid_scale),
        Command::Invert => commands::invert(&loaded, out, cli.grid_scale),
        Command::Correlate => commands::correlate(&loaded, out, cli.grid_scale),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("viscobound: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
