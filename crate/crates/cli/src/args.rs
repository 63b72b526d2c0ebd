use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "bridgestop",
    version,
    about = "Optimal stopping barriers for bridge-type price views"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The barrier constant β(α), at one α or over a uniform sweep.
    Beta(BetaArgs),
    /// The value function V*(x, t).
    Value(ValueArgs),
    /// Simulated paths with the ±1 std band and the barrier.
    Paths(PathsArgs),
    /// Monte Carlo dominance scan and value check for the optimal barrier.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Beta(_) => "beta",
            Command::Value(_) => "value",
            Command::Paths(_) => "paths",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Sqrt,
    Power,
    Linear,
    File,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveArgs {
    /// Curve family for γ(t).
    #[arg(long, value_enum, default_value_t = CurveKind::Sqrt)]
    pub curve: CurveKind,
    /// Scale c of the family. Defaults to β(α) for sqrt, 1 otherwise.
    #[arg(long)]
    pub curve_scale: Option<f64>,
    /// Exponent p of the power family.
    #[arg(long)]
    pub curve_exp: Option<f64>,
    /// CSV file with header `t,gamma` for `--curve file`.
    #[arg(long)]
    pub curve_file: Option<PathBuf>,
    /// Terminal view γ(1) for parametric families (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_final: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BetaArgs {
    /// A single α; overrides the sweep flags.
    #[arg(long, conflicts_with_all = ["alpha_min", "alpha_max", "points"])]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValueArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PathsArgs {
    /// Comma-separated α values, one panel each.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub alpha: Vec<f64>,
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// Paths per α.
    #[arg(long, default_value_t = 4)]
    pub paths: usize,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// Barrier scales c to compare; must include 1.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,1,1.25,1.5")]
    pub scales: Vec<f64>,
    #[arg(long, default_value_t = 20_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}
