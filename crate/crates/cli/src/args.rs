use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "oddrmt", version, about = "Correlation functions of β=1 ensembles of either parity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// One-point (real) density on a grid.
    Density(DensityArgs),
    /// A single n-point correlation with the assembled matrix.
    Correlate(CorrelateArgs),
    /// Run a verification suite; exit 1 if any tolerance is missed.
    Verify(VerifyArgs),
    /// Monte Carlo histogram of real eigenvalues against the analytic density.
    McCompare(McArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleArg {
    Goe,
    Ginoe,
}

impl EnsembleArg {
    pub fn name(self) -> &'static str {
        match self {
            Self::Goe => "goe",
            Self::Ginoe => "ginoe",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelPath {
    Finite,
    Summed,
    Both,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, value_enum, default_value = "goe")]
    pub ensemble: EnsembleArg,
    /// Matrix size N.
    #[arg(long, default_value_t = 4)]
    pub size: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct DensityArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid as `min:max:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    /// Kernel evaluation path; `summed` and `both` need the Ginibre ensemble.
    #[arg(long, value_enum, default_value = "finite")]
    pub kernel: KernelPath,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_summed: f64,
}

#[derive(Args, Debug, Clone)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated points; complex points as `a+bi` with `b > 0`.
    #[arg(long, allow_hyphen_values = true)]
    pub points: String,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// One of pfaffian, skew, kernels, reduction, all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_pfaffian: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_skew: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub tol_kernels: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_summed: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol_reduction: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_pf3: f64,
}

#[derive(Args, Debug, Clone)]
pub struct McArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    /// Histogram range as `min:max`.
    #[arg(long, default_value = "-4:4", allow_hyphen_values = true)]
    pub range: String,
    /// Largest admissible per-bin |z|.
    #[arg(long, default_value_t = 4.0)]
    pub tol_z: f64,
    /// Admissible deviation of the mean real count, in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub tol_mean: f64,
}
