use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{aggregate, percent_error, AccuracyMetrics};
use super::synthetic::RNG_NAME;
use crate::error::{Error, Result};
use crate::estimate::{estimate, EstimateConfig};
use crate::model::BinnedDataset;
use crate::stats::Statistic;

/// A labelled estimator configuration, such as "step, mean-matched".
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkMethod {
    pub label: String,
    pub config: EstimateConfig,
}

impl BenchmarkMethod {
    pub fn new(label: impl Into<String>, config: EstimateConfig) -> Self {
        BenchmarkMethod {
            label: label.into(),
            config,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchmarkOptions {
    /// Compared against the dataset's reference Gini or known mean.
    pub statistic: Statistic,
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
    /// Divide every count by this before fitting.
    pub rescale_counts: Option<f64>,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions {
            statistic: Statistic::Gini,
            threads: None,
            rescale_counts: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetResult {
    pub dataset_id: String,
    pub method: String,
    pub estimate: Option<f64>,
    pub reference: Option<f64>,
    pub percent_error: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    /// Wall-clock time for the whole collection, fitting and integration only.
    pub runtime_seconds: f64,
    pub failures: usize,
    /// Over every dataset this method handled.
    pub all: Option<AccuracyMetrics>,
    /// Over the datasets every method handled.
    pub common: Option<AccuracyMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorMetricsReport {
    pub statistic: String,
    pub threads: usize,
    pub rng: &'static str,
    pub datasets: usize,
    pub common_datasets: usize,
    pub methods: Vec<MethodSummary>,
    pub rows: Vec<DatasetResult>,
}

impl ErrorMetricsReport {
    pub fn method(&self, label: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == label)
    }
}

fn reference_of(dataset: &BinnedDataset, statistic: Statistic) -> Option<f64> {
    match statistic {
        Statistic::Gini => dataset.reference_gini,
        Statistic::Mean => dataset.known_mean,
        _ => None,
    }
}

/// Runs every method over every dataset. Per-dataset failures are recorded
/// and excluded from the metrics; they never stop the run.
pub fn run_benchmark(
    datasets: &[BinnedDataset],
    methods: &[BenchmarkMethod],
    options: &BenchmarkOptions,
) -> Result<ErrorMetricsReport> {
    if !matches!(options.statistic, Statistic::Gini | Statistic::Mean) {
        return Err(Error::Precondition(format!(
            "benchmarks compare gini or mean, not {}",
            options.statistic
        )));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = options.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?;
    let prepared: Vec<BinnedDataset> = match options.rescale_counts {
        Some(d) => datasets.iter().map(|ds| ds.rescaled_counts(d)).collect(),
        None => datasets.to_vec(),
    };
    let which = [options.statistic];

    let mut per_method: Vec<(Vec<DatasetResult>, f64)> = Vec::with_capacity(methods.len());
    for m in methods {
        let started = Instant::now();
        let estimates: Vec<Result<f64>> = pool.install(|| {
            prepared
                .par_iter()
                .map(|d| {
                    estimate(d, &m.config, &which)?
                        .statistics
                        .get(options.statistic)
                        .ok_or(Error::UndefinedMoment { order: 1 })
                })
                .collect()
        });
        let runtime = started.elapsed().as_secs_f64();
        let rows = prepared
            .iter()
            .zip(estimates)
            .map(|(d, est)| {
                let reference = reference_of(d, options.statistic);
                let (estimate, error) = match est {
                    Ok(v) => (Some(v), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                let (percent, error) = match (estimate, reference) {
                    (Some(e), Some(r)) => match percent_error(e, r) {
                        Ok(p) => (Some(p), error),
                        Err(err) => (None, Some(err.to_string())),
                    },
                    (_, None) => (None, error.or_else(|| Some("no reference value".into()))),
                    _ => (None, error),
                };
                DatasetResult {
                    dataset_id: d.id.clone(),
                    method: m.label.clone(),
                    estimate,
                    reference,
                    percent_error: percent,
                    error,
                }
            })
            .collect();
        per_method.push((rows, runtime));
    }

    let common: Vec<bool> = (0..prepared.len())
        .map(|i| per_method.iter().all(|(rows, _)| rows[i].percent_error.is_some()))
        .collect();
    let pairs = |rows: &[DatasetResult], keep: &dyn Fn(usize) -> bool| -> Vec<(f64, f64)> {
        rows.iter()
            .enumerate()
            .filter(|(i, r)| keep(*i) && r.percent_error.is_some())
            .map(|(_, r)| (r.estimate.expect("scored"), r.reference.expect("scored")))
            .collect()
    };
    let mut summaries = Vec::with_capacity(methods.len());
    let mut rows = Vec::new();
    for (m, (method_rows, runtime)) in methods.iter().zip(per_method) {
        let all = pairs(&method_rows, &|_| true);
        let shared = pairs(&method_rows, &|i| common[i]);
        summaries.push(MethodSummary {
            method: m.label.clone(),
            runtime_seconds: runtime,
            failures: method_rows.iter().filter(|r| r.percent_error.is_none()).count(),
            all: aggregate(&all).ok(),
            common: aggregate(&shared).ok(),
        });
        rows.extend(method_rows);
    }
    Ok(ErrorMetricsReport {
        statistic: options.statistic.to_string(),
        threads: pool.current_num_threads(),
        rng: RNG_NAME,
        datasets: prepared.len(),
        common_datasets: common.iter().filter(|c| **c).count(),
        methods: summaries,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::Method;
    use crate::eval::synthetic::{county_collection, generate_synthetic, Binning, Generator, SyntheticSpec};
    use crate::interp::TailKind;

    #[test]
    fn degenerate_bins_give_zero_rmse() {
        let datasets: Vec<BinnedDataset> = (0..5)
            .map(|i| {
                let v = 10.0 * (i + 1) as f64;
                generate_synthetic(&SyntheticSpec {
                    id: format!("c{i}"),
                    generator: Generator::Constant { value: v },
                    sample_size: 100,
                    binning: Binning::Bounded(vec![0.0, 2.0 * v]),
                    seed: i,
                })
                .unwrap()
                .dataset
            })
            .collect();
        let options = BenchmarkOptions {
            statistic: Statistic::Mean,
            threads: Some(1),
            ..Default::default()
        };
        let methods = [BenchmarkMethod::new("midpoint", EstimateConfig::new(Method::Midpoint))];
        let report = run_benchmark(&datasets, &methods, &options).unwrap();
        let m = report.method("midpoint").unwrap().all.unwrap();
        assert_eq!(m.rmse, 0.0);
        assert_eq!(report.methods[0].failures, 0);
    }

    #[test]
    fn synthetic_collection_runs_without_failures() {
        let datasets: Vec<BinnedDataset> = county_collection(100, 11).unwrap().into_iter().map(|s| s.dataset).collect();
        let methods = [
            BenchmarkMethod::new("midpoint", EstimateConfig::new(Method::Midpoint)),
            BenchmarkMethod::new("step+mean", EstimateConfig::mean_matched(Method::Step { tail: None })),
        ];
        let report = run_benchmark(&datasets, &methods, &BenchmarkOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 200);
        for m in &report.methods {
            assert_eq!(m.failures, 0, "{}", m.method);
            assert!(m.all.unwrap().rmse < 10.0);
        }
        assert_eq!(report.common_datasets, 100);
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let mut datasets: Vec<BinnedDataset> = county_collection(3, 5).unwrap().into_iter().map(|s| s.dataset).collect();
        datasets[1].known_mean = None;
        let methods = [
            BenchmarkMethod::new("step", EstimateConfig::mean_matched(Method::Step { tail: Some(TailKind::Pareto) })),
            BenchmarkMethod::new("midpoint", EstimateConfig::new(Method::Midpoint)),
        ];
        let report = run_benchmark(&datasets, &methods, &BenchmarkOptions::default()).unwrap();
        assert_eq!(report.method("step").unwrap().failures, 1);
        assert_eq!(report.method("midpoint").unwrap().failures, 0);
        assert_eq!(report.method("midpoint").unwrap().all.unwrap().n, 3);
        assert_eq!(report.method("midpoint").unwrap().common.unwrap().n, 2);
        assert!(report.rows.iter().any(|r| r.error.as_deref().is_some_and(|e| e.contains("known mean"))));
    }
}
