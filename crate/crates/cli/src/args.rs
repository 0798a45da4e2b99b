use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Transition kernels, nonlocal-diffusion geometry, simulation and pricing
/// for the translation-type quantum Black-Scholes model.
#[derive(Debug, Parser)]
#[command(name = "qbs", version, about, propagate_version = true)]
pub struct Cli {
    /// JSON file with default values; explicit flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory receiving the CSV and SVG artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: logical core count).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the kernel for one or more translations.
    Kernel(KernelArgs),
    /// Blurring-density moments (flat or exponential metric).
    Moments(MomentsArgs),
    /// Fit metric weights reproducing a blurring density's moments.
    FitMetric(FitArgs),
    /// Sample the kernel law or run the particle method.
    Simulate(SimulateArgs),
    /// Price European options and invert implied vols.
    Price(PriceArgs),
    /// Implied-vol smiles and the ATM skew term structure.
    Smile(SmileArgs),
    /// Run the invariant suite.
    Validate,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Horizon in years.
    #[arg(long = "t", alias = "horizon", allow_negative_numbers = true)]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated translations.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub epsilon: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub method: Option<KernelMethodArg>,
    /// `closed` or a series order K >= 2 (spectral method only).
    #[arg(long)]
    pub truncation: Option<String>,
    /// Zero unstable modes instead of failing (spectral method only).
    #[arg(long)]
    pub filter: bool,
    /// Grid points per standard deviation in the continuous regime (lattice
    /// kernels always use one node per lattice site).
    #[arg(long)]
    pub points_per_std: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Exponential-metric rate; 0 selects the flat sequence.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub blur: Option<BlurArg>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub order: Option<usize>,
    /// Lower end of the uniform blur.
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    /// Upper end of the uniform blur.
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<f64>,
    /// Location of the Dirac blur.
    #[arg(long, allow_negative_numbers = true)]
    pub at: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorArg>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Euler steps of the particle method.
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PriceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub spot: Option<f64>,
    /// Comma-separated strikes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub strikes: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub side: Option<SideArg>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
}

#[derive(Debug, Clone, Args)]
pub struct SmileArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub spot: Option<f64>,
    /// Comma-separated maturities in years.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub maturities: Option<Vec<f64>>,
    /// Comma-separated strike offsets in standard deviations.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub offsets: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMethodArg {
    Fourier,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlurArg {
    Triangular,
    Uniform,
    Dirac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorArg {
    Oracle,
    Particle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionArg {
    Normal,
    Lognormal,
}
