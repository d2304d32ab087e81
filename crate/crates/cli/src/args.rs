use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use binned_income::interp::TailKind;
use binned_income::parametric::Family;
use binned_income::stats::Statistic;

#[derive(Debug, Parser)]
#[command(name = "binned-income", version, about = "Income statistics from binned income tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate statistics for every table in a bins CSV.
    Estimate(EstimateArgs),
    /// Sample a fitted density and CDF on an even grid.
    Density(DensityArgs),
    /// Score methods against reference statistics.
    Benchmark(BenchmarkArgs),
    /// Write a synthetic county collection as a bins and refs CSV pair.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Midpoint,
    Step,
    Spline,
    Subdivide,
    Parametric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Criterion {
    Aic,
    Bic,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Bins CSV with columns dataset_id,bin_lower,bin_upper,count.
    #[arg(long)]
    pub input: PathBuf,
    /// Refs CSV with columns dataset_id,mean,gini.
    #[arg(long)]
    pub refs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MethodOptions {
    /// Constrain the fit to the known mean from --refs or --mean.
    #[arg(long)]
    pub mean_match: bool,
    /// Known mean applied to every table; needs --mean-match.
    #[arg(long)]
    pub mean: Option<f64>,
    /// Top-bin tail for step and subdivide: rectangular, pareto or exponential.
    #[arg(long)]
    pub tail: Option<TailKind>,
    /// Parametric families, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub families: Vec<Family>,
    /// Pick the parametric fit with the lowest criterion (the default, by AIC).
    #[arg(long, value_enum, conflicts_with = "average")]
    pub select: Option<Criterion>,
    /// Average parametric fits with criterion weights.
    #[arg(long, value_enum)]
    pub average: Option<Criterion>,
    /// Subdivision position of the left split.
    #[arg(long)]
    pub eps1: Option<f64>,
    /// Subdivision position of the right split.
    #[arg(long)]
    pub eps2: Option<f64>,
    /// Subdivision rounds.
    #[arg(long)]
    pub rounds: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Estimation method.
    #[arg(long, value_enum, default_value = "step")]
    pub method: MethodName,
    #[command(flatten)]
    pub options: MethodOptions,
    /// Statistics, comma separated: mean, median, sd, gini, theil, mld, cv, pNN.
    #[arg(long, value_delimiter = ',', default_value = "mean,median,gini")]
    pub stats: Vec<Statistic>,
    /// Only this table.
    #[arg(long)]
    pub dataset: Option<String>,
    /// Divide every count by this before fitting.
    #[arg(long)]
    pub rescale_counts: Option<f64>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Emit JSON with per-fit diagnostics instead of CSV.
    #[arg(long)]
    pub json: bool,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Estimation method.
    #[arg(long, value_enum, default_value = "step")]
    pub method: MethodName,
    #[command(flatten)]
    pub options: MethodOptions,
    /// Table to sample; needed when the input holds several.
    #[arg(long)]
    pub dataset: Option<String>,
    /// Grid points.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    /// Divide every count by this before fitting.
    #[arg(long)]
    pub rescale_counts: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Bins CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Refs CSV holding the reference statistics.
    #[arg(long)]
    pub refs: PathBuf,
    /// Methods to compare, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "midpoint,step,spline")]
    pub method: Vec<MethodName>,
    /// Method options; --mean-match applies to every method but parametric.
    #[command(flatten)]
    pub options: MethodOptions,
    /// Statistic to score: gini or mean.
    #[arg(long, default_value = "gini")]
    pub stats: Statistic,
    /// Divide every count by this before fitting; 1 keeps counts as given.
    #[arg(long, default_value_t = 8.0)]
    pub rescale_counts: f64,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Emit the full report as JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
    /// Per-dataset CSV (or JSON report) goes here; the summary table goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of county tables.
    #[arg(long, default_value_t = 100)]
    pub counties: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Directory that receives bins.csv and refs.csv.
    #[arg(long)]
    pub out: PathBuf,
}
