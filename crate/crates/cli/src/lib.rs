//! Command-line front end for the `lmagg` library.
//!
//! Every subcommand reads a flat `key=value` configuration (file plus flag
//! overrides), writes a machine-readable result (`--output`, or stdout) that
//! starts with a comment header, and prints an aligned summary table to
//! stdout when the result goes to a file.

pub mod commands;
pub mod config;
pub mod ingest;
pub mod io;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "lmagg", version, about = "Seasonal long-memory models for aggregate time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evaluate a spectral density on an evenly spaced grid over (0, π]
    Spectrum,
    /// Periodogram of the (differenced) input series
    Periodogram,
    /// Simulate a Gaussian series from a model spectrum
    Simulate,
    /// Fit the model by Whittle likelihood over all differencing cells
    Fit,
    /// Fisher information and asymptotic standard errors at given parameters
    Fisher,
    /// Fit, then run the frequency-domain parametric bootstrap
    Bootstrap,
    /// Fit, then forecast the next `horizon` values
    Forecast,
    /// Split-sample forecast comparison against a competitor model
    Compare,
    /// Monte Carlo table of estimator means and standard deviations
    McTable,
    /// Count timestamps per window into an aggregate series
    Ingest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Periodogram => "periodogram",
            Command::Simulate => "simulate",
            Command::Fit => "fit",
            Command::Fisher => "fisher",
            Command::Bootstrap => "bootstrap",
            Command::Forecast => "forecast",
            Command::Compare => "compare",
            Command::McTable => "mc-table",
            Command::Ingest => "ingest",
        }
    }
}

/// Flags shared by all subcommands. Each maps onto a configuration key and
/// overrides the value from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Key-value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Extra configuration entries, applied after the file and before flags
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Input file (series or timestamps)
    #[arg(short, long, global = true)]
    pub input: Option<PathBuf>,
    /// Machine-readable output file (stdout when omitted)
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for parallel sections (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Aggregate-scale seasonal periods, e.g. 10 or [1,48,336]
    #[arg(long, global = true)]
    pub z: Option<String>,
    /// Aggregation size
    #[arg(long, global = true)]
    pub m: Option<u32>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub d: Option<f64>,
    /// Seasonal fractional orders D_1..D_c
    #[arg(long = "D", global = true, allow_hyphen_values = true)]
    pub big_d: Option<String>,
    #[arg(long, global = true)]
    pub sigma2: Option<f64>,
    /// Regular AR coefficients
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// Sample length (simulate, fisher, mc-table)
    #[arg(short, long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    #[arg(long, global = true)]
    pub level: Option<f64>,
    /// limiting or sarfima
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Bound K on the differencing orders
    #[arg(long = "max-order", global = true)]
    pub max_order: Option<u32>,
    /// Truncation M of the power sum
    #[arg(long, global = true)]
    pub truncation: Option<u32>,
    #[arg(long = "no-tail-correction", global = true)]
    pub no_tail_correction: bool,
    /// Spectrum kind: limiting, aggregate, sarfima or simulation
    #[arg(long, global = true)]
    pub kind: Option<String>,
    /// Number of frequencies for `spectrum`
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Aggregation window in seconds for `ingest`
    #[arg(long, global = true)]
    pub window: Option<f64>,
    /// Apply log(count + 1) in `ingest`
    #[arg(long = "log-transform", global = true)]
    pub log_transform: bool,
}

#[derive(Debug)]
pub enum CliError {
    Core(lmagg::Error),
    Io(String),
    Usage(String),
}

impl CliError {
    /// 2 input, 3 numeric, 4 non-convergence, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        use lmagg::Error;
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                Error::InvalidInput(_) => 2,
                Error::Pole { .. } | Error::Numeric(_) | Error::Singular { .. } | Error::Simulation(_) => 3,
                Error::NonConvergence(_) | Error::FitFailed { .. } => 4,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(lmagg::Error::FitFailed { cells }) => {
                write!(f, "all {} differencing cells failed", cells.len())?;
                for c in cells {
                    write!(f, "\n  {c}")?;
                }
                Ok(())
            }
            CliError::Core(lmagg::Error::Singular { null_space }) => {
                write!(f, "singular information matrix; null directions:")?;
                for v in null_space {
                    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
                    write!(f, "\n  [{}]", parts.join(", "))?;
                }
                Ok(())
            }
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) | CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<lmagg::Error> for CliError {
    fn from(e: lmagg::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Runs one subcommand.
pub fn run(cli: &Cli) -> CliResult<()> {
    let cfg = RunConfig::load(cli.command, &cli.options)?;
    let work = || commands::execute(&cfg);
    let report = match cli.options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    io::emit(&cfg, &report, cli.options.output.as_deref())
}
