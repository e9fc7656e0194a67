//! `kdiff`: reproducible spectral/diffraction experiments from the command
//! line.
//!
//! Exit codes: 0 success, 1 a tolerance gate failed, 2 usage, schema or
//! precondition errors. Errors are also printed to stderr as one JSON line.

mod commands;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "kdiff", version, about = "Spectral measures as diffraction measures, computed two ways")]
struct Cli {
    /// Worker threads (outputs do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List built-in systems and observables with their parameter schemas.
    ListSystems {
        #[arg(long)]
        json: bool,
    },
    /// Write an orbit sample n ↦ f(α_{−n}x) as CSV.
    Sample(SampleArgs),
    /// Orbit (and optionally Monte Carlo) autocorrelation coefficients.
    Autocorr(AutocorrArgs),
    /// Diffraction measure of an orbit, optionally with the Monte Carlo side.
    Spectrum(SpectrumArgs),
    /// Distances between two measure files; exit 1 if above --tol.
    Compare(CompareArgs),
    /// Factor-map identities for a system, observable and test functions.
    FactorCheck(FactorArgs),
    /// Mean-almost-periodicity classifier.
    Classify(ClassifyArgs),
    /// Run a full experiment from a JSON config.
    #[command(alias = "run")]
    Report(ReportArgs),
}

#[derive(Args)]
pub struct SystemArgs {
    /// Built-in name or path to a JSON system config.
    #[arg(long)]
    pub system: String,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[arg(long)]
    pub observable: String,
    #[arg(long)]
    pub length: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EstimatorArgs {
    #[arg(long)]
    pub observable: String,
    /// Max lag K.
    #[arg(long)]
    pub lags: usize,
    /// Orbit length N.
    #[arg(long)]
    pub orbit: usize,
    /// Monte Carlo samples M.
    #[arg(long)]
    pub mc: Option<usize>,
    /// biased | lag-extended
    #[arg(long, default_value = "lag-extended")]
    pub window: String,
}

#[derive(Args)]
pub struct AutocorrArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[command(flatten)]
    pub est: EstimatorArgs,
    /// Orbit coefficients CSV; Monte Carlo ones go next to it as `<stem>-mc.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[command(flatten)]
    pub est: EstimatorArgs,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    #[arg(long)]
    pub kernel_order: Option<usize>,
    /// Atom threshold relative to c_0.
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Lag horizon for the coefficient distance (default: smaller max lag).
    #[arg(long)]
    pub lags: Option<usize>,
    #[arg(long)]
    pub tol: f64,
}

#[derive(Args)]
pub struct FactorArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[command(flatten)]
    pub est: EstimatorArgs,
    /// Test functions `n:v,n:v;...` (semicolon separated).
    #[arg(long, default_value = "0:1")]
    pub phi: String,
    /// Tolerance for sampled systems; finite cyclic systems use 1e-12.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    /// Comma-separated observable names.
    #[arg(long)]
    pub observables: String,
    #[arg(long, default_value = "0.5,0.2,0.1")]
    pub eps: String,
    #[arg(long)]
    pub horizon: usize,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// T_max (default horizon/20, so that N/2 ≥ 10·T_max).
    #[arg(long)]
    pub shift_range: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ReportArgs {
    pub config: PathBuf,
    /// Overrides the config's output directory; KOOPMAN_OUT_DIR overrides both.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Why a command failed.
pub enum Failure {
    /// Usage, schema or precondition problem (exit 2).
    Usage(anyhow::Error),
    /// A configured tolerance was exceeded (exit 1).
    Tolerance(String),
}

macro_rules! usage_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Usage(e.into())
            }
        }
    )*};
}

usage_from!(anyhow::Error, koopman_diffraction::Error, std::io::Error, serde_json::Error);

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", serde_json::json!({"error": "usage", "message": e.to_string()}));
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::ListSystems { json } => commands::list_systems(json),
        Command::Sample(a) => commands::sample(&a),
        Command::Autocorr(a) => commands::autocorr(&a),
        Command::Spectrum(a) => commands::spectrum(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::FactorCheck(a) => commands::factor_check(&a),
        Command::Classify(a) => commands::classify(&a),
        Command::Report(a) => experiment::report(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Tolerance(msg)) => {
            eprintln!("{}", serde_json::json!({"error": "tolerance", "message": msg}));
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("{}", serde_json::json!({"error": "usage", "message": format!("{e:#}")}));
            ExitCode::from(2)
        }
    }
}
