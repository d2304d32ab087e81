//! Accuracy benchmarks against reference statistics.
//!
//! For dataset `j` with reference `θ_j` and estimate `θ̂_j`, the percent error
//! is `e_j = 100 (θ̂_j − θ_j)/θ_j`. Bias is the mean of `e_j`, RMSE the root
//! mean of `e_j²`, and reliability the squared correlation between estimates
//! and references.

mod benchmark;
mod metrics;
pub mod synthetic;

pub use benchmark::{run_benchmark, BenchmarkMethod, BenchmarkOptions, DatasetResult, ErrorMetricsReport, MethodSummary};
pub use metrics::{aggregate, percent_error, AccuracyMetrics};
pub use synthetic::{county_collection, generate_synthetic, Binning, Generator, Synthetic, SyntheticSpec};
