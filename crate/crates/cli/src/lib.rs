//! Command-line front end for `binned-income`.
//!
//! Exit codes: 0 on success, 2 when some tables failed (the rest are still
//! written, with a summary on stderr), 1 on configuration or I/O errors.

pub mod args;
mod config;
mod table;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use binned_income::estimate::{estimate, fit_continuous, Estimate, EstimateConfig};
use binned_income::eval::{county_collection, run_benchmark, BenchmarkMethod, BenchmarkOptions};
use binned_income::io::{attach_references, read_bins_csv, read_refs_csv, write_bins_csv, write_refs_csv};
use binned_income::parametric::ParametricDistribution;
use binned_income::stats::{quantile, FittedDistribution, Statistic};
use binned_income::BinnedDataset;

use args::{BenchmarkArgs, Cli, Command, DensityArgs, EstimateArgs, InputArgs, MethodName, SynthArgs};
use config::{check_options, check_positive, check_threads, estimate_config, ConfigResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

/// Per-dataset failures, reported after the successful output is written.
struct Failures(Vec<(String, String)>);

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Estimate(a) => run_estimate(&a),
        Command::Density(a) => run_density(&a),
        Command::Benchmark(a) => run_benchmark_command(&a),
        Command::Synth(a) => run_synth(&a),
    };
    match outcome {
        Ok(Failures(f)) if f.is_empty() => EXIT_OK,
        Ok(Failures(f)) => {
            eprintln!("{} table(s) failed:", f.len());
            for (id, msg) in &f {
                eprintln!("  {id}: {msg}");
            }
            EXIT_PARTIAL
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_CONFIG
        }
    }
}

fn open_out(out: Option<&Path>) -> ConfigResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| format!("cannot create {}: {e}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(e: io::Error) -> String {
    format!("write failed: {e}")
}

fn load(input: &Path, refs: Option<&PathBuf>, rescale: Option<f64>) -> ConfigResult<Vec<BinnedDataset>> {
    let mut datasets = read_bins_csv(input).map_err(|e| read_error(input, e))?;
    if let Some(r) = refs {
        attach_references(&mut datasets, &read_refs_csv(r).map_err(|e| read_error(r, e))?);
    }
    if let Some(d) = rescale {
        datasets = datasets.iter().map(|ds| ds.rescaled_counts(d)).collect();
    }
    Ok(datasets)
}

fn read_error(path: &Path, e: binned_income::Error) -> String {
    match e {
        binned_income::Error::Io(e) => format!("cannot read {}: {e}", path.display()),
        other => other.to_string(),
    }
}

fn pick(datasets: Vec<BinnedDataset>, id: Option<&str>) -> ConfigResult<Vec<BinnedDataset>> {
    match id {
        None => Ok(datasets),
        Some(id) => {
            let kept: Vec<BinnedDataset> = datasets.into_iter().filter(|d| d.id == id).collect();
            if kept.is_empty() {
                return Err(format!("--dataset `{id}` is not in the input"));
            }
            Ok(kept)
        }
    }
}

fn pool(threads: Option<usize>) -> ConfigResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| format!("cannot start worker pool: {e}"))
}

fn check_input(input: &InputArgs, method: MethodName, args: &args::MethodOptions) -> ConfigResult<()> {
    check_options(&[method], args, input.refs.is_some())
}

fn run_estimate(a: &EstimateArgs) -> ConfigResult<Failures> {
    check_input(&a.input, a.method, &a.options)?;
    check_positive("--rescale-counts", a.rescale_counts)?;
    check_threads(a.threads)?;
    if a.stats.is_empty() {
        return Err("--stats is empty".into());
    }
    let config = estimate_config(a.method, &a.options);
    let datasets = pick(load(&a.input.input, a.input.refs.as_ref(), a.rescale_counts)?, a.dataset.as_deref())?;
    let results: Vec<Result<Estimate, String>> = pool(a.threads)?.install(|| {
        datasets
            .par_iter()
            .map(|d| estimate(d, &config, &a.stats).map_err(|e| e.to_string()))
            .collect()
    });
    let mut out = open_out(a.out.as_deref())?;
    if a.json {
        write_estimates_json(&mut out, &datasets, &config, &results)?;
    } else {
        write_estimates_csv(&mut out, &a.stats, &results).map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    Ok(failures(&datasets, &results))
}

fn failures<T>(datasets: &[BinnedDataset], results: &[Result<T, String>]) -> Failures {
    Failures(
        datasets
            .iter()
            .zip(results)
            .filter_map(|(d, r)| r.as_ref().err().map(|e| (d.id.clone(), e.clone())))
            .collect(),
    )
}

fn write_estimates_csv(out: &mut dyn Write, stats: &[Statistic], results: &[Result<Estimate, String>]) -> io::Result<()> {
    writeln!(out, "dataset_id,method,statistic,value")?;
    for est in results.iter().flatten() {
        for &s in stats {
            let value = est.statistics.get(s).map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{}", csv_field(&est.dataset_id), est.method, s, value)?;
        }
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum JsonEstimate<'a> {
    Ok(&'a Estimate),
    Failed {
        dataset_id: &'a str,
        method: &'static str,
        error: &'a str,
    },
}

fn write_estimates_json(
    out: &mut dyn Write,
    datasets: &[BinnedDataset],
    config: &EstimateConfig,
    results: &[Result<Estimate, String>],
) -> ConfigResult<()> {
    let rows: Vec<JsonEstimate> = datasets
        .iter()
        .zip(results)
        .map(|(d, r)| match r {
            Ok(e) => JsonEstimate::Ok(e),
            Err(error) => JsonEstimate::Failed {
                dataset_id: &d.id,
                method: config.method.name(),
                error,
            },
        })
        .collect();
    serde_json::to_writer_pretty(&mut *out, &rows).map_err(|e| format!("write failed: {e}"))?;
    writeln!(out).map_err(io_err)
}

/// Criterion-weighted mixture of parametric fits.
struct Mixture(Vec<(f64, ParametricDistribution)>);

impl FittedDistribution for Mixture {
    fn cdf(&self, x: f64) -> f64 {
        self.0.iter().map(|(w, d)| w * d.cdf(x)).sum()
    }
    fn sf(&self, x: f64) -> f64 {
        self.0.iter().map(|(w, d)| w * d.sf(x)).sum()
    }
    fn pdf(&self, x: f64) -> f64 {
        self.0.iter().map(|(w, d)| w * d.pdf(x)).sum()
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

fn parametric_mixture(dataset: &BinnedDataset, config: &EstimateConfig) -> Result<Mixture, String> {
    let est = estimate(dataset, config, &[]).map_err(|e| e.to_string())?;
    let parts = est
        .diagnostics
        .model_weights
        .iter()
        .filter(|(_, w)| *w > 0.0)
        .filter_map(|(family, w)| {
            let fit = est.diagnostics.fits.iter().find(|f| f.family == *family)?;
            Some((*w, fit.distribution()))
        })
        .collect();
    Ok(Mixture(parts))
}

#[derive(Serialize)]
struct DensityPoint {
    x: f64,
    pdf: f64,
    cdf: f64,
}

/// `points` evenly spaced incomes from the bottom of the support to the 0.999
/// quantile.
fn density_grid(dist: &dyn FittedDistribution, points: usize) -> Vec<DensityPoint> {
    let lo = dist.support().0.max(0.0);
    let hi = quantile(dist, 0.999);
    (0..points)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            DensityPoint {
                x,
                pdf: dist.pdf(x),
                cdf: dist.cdf(x),
            }
        })
        .collect()
}

fn run_density(a: &DensityArgs) -> ConfigResult<Failures> {
    check_input(&a.input, a.method, &a.options)?;
    check_positive("--rescale-counts", a.rescale_counts)?;
    check_threads(a.threads)?;
    if a.method == MethodName::Midpoint {
        return Err("--method midpoint has no density; use step, spline, subdivide or parametric".into());
    }
    if a.points < 2 {
        return Err("--points must be at least 2".into());
    }
    let config = estimate_config(a.method, &a.options);
    let datasets = pick(load(&a.input.input, a.input.refs.as_ref(), a.rescale_counts)?, a.dataset.as_deref())?;
    let [dataset] = datasets.as_slice() else {
        return Err(format!("the input holds {} tables; choose one with --dataset", datasets.len()));
    };
    let grid = pool(a.threads)?.install(|| -> Result<Vec<DensityPoint>, String> {
        if a.method == MethodName::Parametric {
            Ok(density_grid(&parametric_mixture(dataset, &config)?, a.points))
        } else {
            let fit = fit_continuous(dataset, &config).map_err(|e| e.to_string())?;
            Ok(density_grid(fit.as_distribution(), a.points))
        }
    });
    let grid = match grid {
        Ok(g) => g,
        Err(e) => return Ok(Failures(vec![(dataset.id.clone(), e)])),
    };
    let mut out = open_out(a.out.as_deref())?;
    if a.json {
        serde_json::to_writer_pretty(&mut out, &grid).map_err(|e| format!("write failed: {e}"))?;
        writeln!(out).map_err(io_err)?;
    } else {
        writeln!(out, "x,pdf,cdf").map_err(io_err)?;
        for p in &grid {
            writeln!(out, "{},{},{}", p.x, p.pdf, p.cdf).map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)?;
    Ok(Failures(Vec::new()))
}

fn run_benchmark_command(a: &BenchmarkArgs) -> ConfigResult<Failures> {
    check_options(&a.method, &a.options, true)?;
    check_positive("--rescale-counts", Some(a.rescale_counts))?;
    check_threads(a.threads)?;
    if !matches!(a.stats, Statistic::Gini | Statistic::Mean) {
        return Err(format!("--stats for benchmark must be gini or mean, got {}", a.stats));
    }
    let mut methods: Vec<BenchmarkMethod> = Vec::new();
    for &m in &a.method {
        let config = estimate_config(m, &a.options);
        let label = if config.mean_match { format!("{}+mean", m.as_str()) } else { m.as_str().to_string() };
        if methods.iter().any(|b| b.label == label) {
            return Err(format!("--method lists {label} twice"));
        }
        methods.push(BenchmarkMethod::new(label, config));
    }
    let datasets = load(&a.input, Some(&a.refs), None)?;
    let options = BenchmarkOptions {
        statistic: a.stats,
        threads: a.threads,
        rescale_counts: (a.rescale_counts != 1.0).then_some(a.rescale_counts),
    };
    let report = run_benchmark(&datasets, &methods, &options).map_err(|e| e.to_string())?;

    let mut out = open_out(a.out.as_deref())?;
    if a.json {
        serde_json::to_writer_pretty(&mut out, &report).map_err(|e| format!("write failed: {e}"))?;
        writeln!(out).map_err(io_err)?;
    } else {
        writeln!(out, "dataset_id,method,estimate,reference,percent_error,error").map_err(io_err)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &report.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&r.dataset_id),
                r.method,
                opt(r.estimate),
                opt(r.reference),
                opt(r.percent_error),
                csv_field(r.error.as_deref().unwrap_or(""))
            )
            .map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)?;
    drop(out);

    let rendered = table::render(&report);
    if a.out.is_some() {
        print!("{rendered}");
    } else {
        eprint!("{rendered}");
    }
    Ok(Failures(
        report
            .rows
            .iter()
            .filter_map(|r| r.error.as_ref().map(|e| (format!("{} [{}]", r.dataset_id, r.method), e.clone())))
            .collect(),
    ))
}

fn run_synth(a: &SynthArgs) -> ConfigResult<Failures> {
    if a.counties == 0 {
        return Err("--counties must be at least 1".into());
    }
    let tables: Vec<BinnedDataset> = county_collection(a.counties, a.seed)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|s| s.dataset)
        .collect();
    std::fs::create_dir_all(&a.out).map_err(|e| format!("cannot create {}: {e}", a.out.display()))?;
    write_bins_csv(a.out.join("bins.csv"), &tables).map_err(|e| e.to_string())?;
    write_refs_csv(a.out.join("refs.csv"), &tables).map_err(|e| e.to_string())?;
    eprintln!("wrote {} tables to {}", tables.len(), a.out.display());
    Ok(Failures(Vec::new()))
}
