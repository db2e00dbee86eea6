//! Command-line front end for the qscatter library.
//!
//! Exit codes: 0 success, 1 computation or verification failure, 2 bad
//! arguments or config, 3 I/O failure.

mod commands;
mod config;
mod csvio;
mod envelope;
mod svg;

use clap::{Args, Parser, Subcommand};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Bad flag or config values.
    Usage(String),
    /// A computation failed or verification did not pass.
    Compute(String),
    /// Reading or writing files failed.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Compute(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

/// Excitable point-scatterer toolkit: amplitudes, two-fermion concurrences,
/// sweeps, S-matrix poles, and a self-verification battery.
///
/// Every value flag falls back to a key of the same name (underscores for
/// dashes) in the config file named by --config or the QSCATTER_CONFIG
/// environment variable, then to the built-in default.
#[derive(Debug, Parser)]
#[command(name = "qscatter", version, max_term_width = 100)]
pub struct Cli {
    /// Flat key=value config file; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores). Output is identical
    /// for any thread count.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reflection/transmission amplitudes at one momentum.
    Amp(AmpArgs),
    /// Concurrence report for one two-particle configuration.
    Conc(ConcArgs),
    /// Parameter sweeps (CSV output).
    Sweep {
        #[command(subcommand)]
        kind: SweepCmd,
    },
    /// Newton search for the S-matrix pole.
    Poles(PolesArgs),
    /// Run the invariant battery over the reference grid.
    Verify(VerifyArgs),
    /// Render a sweep CSV as an SVG line plot.
    Plot(PlotArgs),
}

#[derive(Debug, Subcommand)]
pub enum SweepCmd {
    /// Transmission probabilities vs momentum.
    K(SweepKArgs),
    /// Concurrence vs momentum separation, one curve per e_exc.
    Dk(SweepDkArgs),
    /// Concurrence vs coupling, one curve per e_exc.
    G(SweepGArgs),
}

#[derive(Debug, Args)]
pub struct AmpArgs {
    /// Elastic scatterer strength (> 0). Default 1.
    #[arg(long, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    /// Relative inelastic coupling (>= 0). Default 0.5.
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// Dimensionless excitation energy (>= 0). Default 1.
    #[arg(long, allow_negative_numbers = true)]
    pub e_exc: Option<f64>,
    /// Incident momentum (> 0). Default 1.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Write the result envelope as JSON.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConcArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub e_exc: Option<f64>,
    /// First incident momentum. Default 0.5.
    #[arg(long, allow_negative_numbers = true)]
    pub k1: Option<f64>,
    /// Second incident momentum. Default 1.5.
    #[arg(long, allow_negative_numbers = true)]
    pub k2: Option<f64>,
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepKArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub e_exc: Option<f64>,
    /// Lowest momentum. Default 0.05.
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    /// Highest momentum. Default 3.
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<f64>,
    /// Grid size. Default 256.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepDkArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// First momentum; the partner is k1 + dk. Default 0.5.
    #[arg(long, allow_negative_numbers = true)]
    pub k1: Option<f64>,
    /// Comma-separated excitation energies, one curve each.
    /// Default 0.01,0.3,7.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub e_exc_curves: Option<Vec<f64>>,
    /// Lowest separation. Default 0.005.
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    /// Highest separation. Default 2.
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<f64>,
    /// Grid size. Default 400.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepGArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k2: Option<f64>,
    /// Comma-separated excitation energies, one curve each.
    /// Default 0,0.125,0.5,1.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub e_exc_curves: Option<Vec<f64>>,
    /// Lowest coupling. Default 0.
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    /// Highest coupling. Default 3.
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<f64>,
    /// Grid size. Default 300.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PolesArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    /// Default 0 (elastic bound state).
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub e_exc: Option<f64>,
    /// Starting point, complex a+bi (e.g. 0.4i or 0.1+0.4i). Default 0.4i.
    #[arg(long, allow_hyphen_values = true)]
    pub guess: Option<String>,
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Replace every check tolerance (negative-control runs).
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Perturb one grid amplitude before checking (negative control).
    #[arg(long, value_name = "INDEX")]
    pub fault: Option<usize>,
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Sweep CSV to render.
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// SVG output path.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    // Default SIGPIPE disposition, so `qscatter sweep k | head` ends quietly
    // instead of panicking on EPIPE.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
