use approx::assert_relative_eq;
use proptest::prelude::*;

use binned_income::estimate::{estimate, fit_continuous, EstimateConfig, Method};
use binned_income::fixtures::{nantucket, nantucket_with_reference};
use binned_income::interp::{MeanConstraint, StepPdf, TailKind};
use binned_income::io::{attach_references, read_bins, read_bins_csv, read_refs_csv, write_bins, write_bins_csv, write_refs_csv};
use binned_income::parametric::{Family, ModelChoice};
use binned_income::stats::{integrate_statistics, quantile, Statistic};
use binned_income::{Bin, BinnedDataset};

fn table() -> impl Strategy<Value = BinnedDataset> {
    (prop::collection::vec((1.0f64..5e4, 0.0f64..1e4), 1..12), any::<bool>(), "[a-z]{1,8}").prop_map(
        |(parts, open, id)| {
            let mut lower = 0.0;
            let mut bins = Vec::new();
            for (i, (width, count)) in parts.iter().enumerate() {
                let upper = if open && i + 1 == parts.len() { None } else { Some(lower + width) };
                bins.push(Bin::new(lower, upper, *count));
                lower += width;
            }
            BinnedDataset::new(id, bins)
        },
    )
}

proptest! {
    #[test]
    fn csv_round_trip(datasets in prop::collection::vec(table(), 1..4)) {
        // Ids must be unique and rows of one dataset contiguous.
        let datasets: Vec<BinnedDataset> = datasets
            .into_iter()
            .enumerate()
            .map(|(i, mut d)| { d.id = format!("{}-{i}", d.id); d })
            .collect();
        let mut buf = Vec::new();
        write_bins(&mut buf, &datasets).unwrap();
        let back = read_bins(buf.as_slice(), "memory").unwrap();
        prop_assert_eq!(back, datasets);
    }
}

#[test]
fn file_round_trip_with_references() {
    let dir = tempfile::tempdir().unwrap();
    let (bins, refs) = (dir.path().join("bins.csv"), dir.path().join("refs.csv"));
    let d = nantucket_with_reference();
    write_bins_csv(&bins, std::slice::from_ref(&d)).unwrap();
    write_refs_csv(&refs, std::slice::from_ref(&d)).unwrap();
    let mut back = read_bins_csv(&bins).unwrap();
    attach_references(&mut back, &read_refs_csv(&refs).unwrap());
    assert_eq!(back, vec![d]);
}

fn methods() -> Vec<EstimateConfig> {
    vec![
        EstimateConfig::mean_matched(Method::Midpoint),
        EstimateConfig::mean_matched(Method::Step { tail: Some(TailKind::Pareto) }),
        EstimateConfig::mean_matched(Method::Step { tail: Some(TailKind::Exponential) }),
        EstimateConfig::mean_matched(Method::Spline),
        EstimateConfig::mean_matched(Method::Subdivide { tail: None, params: Default::default() }),
        EstimateConfig::new(Method::Parametric { families: vec![Family::Gamma, Family::Lognormal], choice: ModelChoice::SelectAic }),
    ]
}

#[test]
fn rescaling_incomes_scales_the_mean_only() {
    let c = 7.3;
    let d = nantucket_with_reference();
    let mut scaled = d.scaled_boundaries(c);
    scaled.known_mean = d.known_mean.map(|m| m * c);
    let which = [Statistic::Mean, Statistic::Median, Statistic::Gini, Statistic::Theil];
    for config in methods() {
        let a = estimate(&d, &config, &which).unwrap().statistics;
        let b = estimate(&scaled, &config, &which).unwrap().statistics;
        assert_relative_eq!(b.mean.unwrap(), c * a.mean.unwrap(), max_relative = 1e-9);
        assert_relative_eq!(b.gini.unwrap(), a.gini.unwrap(), max_relative = 1e-9);
        assert_relative_eq!(b.theil.unwrap(), a.theil.unwrap(), max_relative = 1e-9);
        if let (Some(ma), Some(mb)) = (a.median, b.median) {
            assert_relative_eq!(mb, c * ma, max_relative = 1e-9);
        }
    }
}

#[test]
fn rescaling_counts_leaves_estimates_unchanged() {
    let d = nantucket_with_reference();
    let scaled = d.rescaled_counts(8.0);
    for config in methods() {
        let a = estimate(&d, &config, &[Statistic::Gini]).unwrap().statistics.gini.unwrap();
        let b = estimate(&scaled, &config, &[Statistic::Gini]).unwrap().statistics.gini.unwrap();
        // The likelihood shrinks with the counts while the simplex stops on an
        // absolute spread, so the parametric optimum moves within its tolerance.
        let tol = if matches!(config.method, Method::Parametric { .. }) { 1e-5 } else { 1e-12 };
        assert_relative_eq!(a, b, max_relative = tol);
    }
}

#[test]
fn quantile_inverts_the_cdf() {
    let d = nantucket_with_reference();
    for config in methods().into_iter().skip(1).take(4) {
        let fit = fit_continuous(&d, &config).unwrap();
        let dist = fit.as_distribution();
        for p in [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
            let x = quantile(dist, p);
            assert!((dist.cdf(x) - p).abs() < 1e-9, "{} p={p}", config.method.name());
        }
    }
}

/// Gini of a step density by direct double integration of |x − y| over
/// pairs of pieces, each pair in closed form.
fn brute_force_gini(pdf: &StepPdf) -> f64 {
    let e = pdf.edges();
    let h = pdf.heights();
    let pieces: Vec<(f64, f64, f64)> = (0..h.len()).map(|i| (e[i], e[i + 1], h[i])).collect();
    let mut mean = 0.0;
    let mut mass = 0.0;
    for &(a, b, f) in &pieces {
        mean += f * (b * b - a * a) / 2.0;
        mass += f * (b - a);
    }
    mean /= mass;
    let mut mad = 0.0;
    for &(a, b, f) in &pieces {
        for &(c, d, g) in &pieces {
            let w = f * g * (b - a) * (d - c);
            if (a, b) == (c, d) {
                mad += w * (b - a) / 3.0;
            } else {
                // Disjoint pieces: |x − y| is linear, so use the midpoints.
                mad += w * ((a + b) / 2.0 - (c + d) / 2.0).abs();
            }
        }
    }
    mad / (2.0 * mean * mass * mass)
}

#[test]
fn step_gini_matches_brute_force() {
    let d = nantucket();
    for constraint in [MeanConstraint::ad_hoc(&d).unwrap(), MeanConstraint::known(137_811.0)] {
        for tail in [TailKind::Rectangular, TailKind::Pareto, TailKind::Exponential] {
            let pdf = binned_income::interp::fit_step_pdf(&d, &constraint, Some(tail)).unwrap();
            let g = integrate_statistics(&pdf, &[Statistic::Gini]).unwrap().gini.unwrap();
            assert_relative_eq!(g, brute_force_gini(&pdf), max_relative = 1e-12);
        }
    }
}
