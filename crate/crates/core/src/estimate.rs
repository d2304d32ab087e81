//! One entry point for every estimator.
//!
//! ```
//! use binned_income::estimate::{estimate, EstimateConfig, Method};
//! use binned_income::fixtures::nantucket;
//! use binned_income::stats::Statistic;
//!
//! let out = estimate(&nantucket(), &EstimateConfig::new(Method::Midpoint), &[Statistic::Gini]).unwrap();
//! assert!((out.statistics.gini.unwrap() - 0.464).abs() < 0.005);
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::{fit_spline_cdf, fit_step_pdf, MeanConstraint, SplineCdf, StepPdf, TailKind, TailSpec};
use crate::midpoint::{midpoint_point_mass, MidpointOptions};
use crate::model::BinnedDataset;
use crate::parametric::{fit_families, model_statistics, Family, ModelChoice, ParametricFitResult};
use crate::stats::{integrate_statistics, weighted_statistics, FittedDistribution, Statistic, StatisticsSet};
use crate::subdivision::{smooth_recursively, SubdivisionParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Method {
    Midpoint,
    /// Linear CDF interpolation; `None` picks the default tail.
    Step { tail: Option<TailKind> },
    Spline,
    Subdivide {
        tail: Option<TailKind>,
        params: SubdivisionParams,
    },
    Parametric {
        families: Vec<Family>,
        choice: ModelChoice,
    },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Midpoint => "midpoint",
            Method::Step { .. } => "step",
            Method::Spline => "spline",
            Method::Subdivide { .. } => "subdivide",
            Method::Parametric { .. } => "parametric",
        }
    }

    /// Every family, selected by AIC.
    pub fn parametric_default() -> Self {
        Method::Parametric {
            families: Family::ALL.to_vec(),
            choice: ModelChoice::SelectAic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateConfig {
    pub method: Method,
    /// Constrain the fit to a known grand mean.
    pub mean_match: bool,
    /// Mean to match; falls back to the dataset's own known mean.
    pub mean: Option<f64>,
}

impl EstimateConfig {
    pub fn new(method: Method) -> Self {
        EstimateConfig {
            method,
            mean_match: false,
            mean: None,
        }
    }

    pub fn mean_matched(method: Method) -> Self {
        EstimateConfig {
            method,
            mean_match: true,
            mean: None,
        }
    }

    /// The mean to match for `dataset`, or `None` when not matching.
    pub fn target_mean(&self, dataset: &BinnedDataset) -> Result<Option<f64>> {
        if !self.mean_match {
            return Ok(None);
        }
        if matches!(self.method, Method::Parametric { .. }) {
            return Err(Error::Precondition("parametric fits cannot be mean-matched".into()));
        }
        self.mean
            .or(dataset.known_mean)
            .map(Some)
            .ok_or_else(|| Error::Precondition(format!("no known mean to match for `{}`", dataset.id)))
    }
}

/// How the fit was pinned down, beyond the statistics themselves.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub constraint: Option<MeanConstraint>,
    pub tail: Option<TailSpec>,
    /// Mean-matched midpoint top value fell below the top bin's lower bound.
    pub top_below_lower_bound: bool,
    pub fits: Vec<ParametricFitResult>,
    pub model_weights: Vec<(Family, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub dataset_id: String,
    pub method: &'static str,
    pub statistics: StatisticsSet,
    pub diagnostics: Diagnostics,
}

/// A continuous fit produced by one of the nonparametric methods.
#[derive(Debug, Clone, PartialEq)]
pub enum ContinuousFit {
    Step(StepPdf),
    Spline(SplineCdf),
}

impl ContinuousFit {
    pub fn as_distribution(&self) -> &dyn FittedDistribution {
        match self {
            ContinuousFit::Step(s) => s,
            ContinuousFit::Spline(s) => s,
        }
    }

    fn constraint(&self) -> Option<MeanConstraint> {
        match self {
            ContinuousFit::Step(s) => s.constraint().copied(),
            ContinuousFit::Spline(s) => s.constraint().copied(),
        }
    }

    fn tail(&self) -> Option<TailSpec> {
        match self {
            ContinuousFit::Step(s) => s.tail().copied(),
            ContinuousFit::Spline(_) => None,
        }
    }
}

/// Fits the step, spline or subdivided density for `dataset`. Other methods
/// have no single density and are rejected.
pub fn fit_continuous(dataset: &BinnedDataset, config: &EstimateConfig) -> Result<ContinuousFit> {
    let constraint = MeanConstraint::from_optional(dataset, config.target_mean(dataset)?)?;
    match &config.method {
        Method::Step { tail } => Ok(ContinuousFit::Step(fit_step_pdf(dataset, &constraint, *tail)?)),
        Method::Spline => Ok(ContinuousFit::Spline(fit_spline_cdf(dataset, &constraint)?)),
        Method::Subdivide { tail, params } => {
            let step = fit_step_pdf(dataset, &constraint, *tail)?;
            Ok(ContinuousFit::Step(smooth_recursively(&step, params)?))
        }
        other => Err(Error::Precondition(format!("the {} method has no fitted density", other.name()))),
    }
}

/// Estimates `which` for `dataset` under `config`.
pub fn estimate(dataset: &BinnedDataset, config: &EstimateConfig, which: &[Statistic]) -> Result<Estimate> {
    dataset.check_structure()?;
    let mut diagnostics = Diagnostics::default();
    let statistics = match &config.method {
        Method::Midpoint => {
            let options = match config.target_mean(dataset)? {
                Some(m) => MidpointOptions::mean_matched(m),
                None => MidpointOptions::harmonic(),
            };
            let points = midpoint_point_mass(dataset, &options)?;
            diagnostics.top_below_lower_bound = points.top_below_lower_bound;
            weighted_statistics(&points, which)?
        }
        Method::Parametric { families, choice } => {
            config.target_mean(dataset)?;
            let fits = fit_families(families, dataset)?;
            let result = model_statistics(&fits, which, *choice);
            diagnostics.fits = fits;
            let (stats, weights) = result?;
            diagnostics.model_weights = weights;
            stats
        }
        _ => {
            let fit = fit_continuous(dataset, config)?;
            diagnostics.constraint = fit.constraint();
            diagnostics.tail = fit.tail();
            integrate_statistics(fit.as_distribution(), which)?
        }
    };
    Ok(Estimate {
        dataset_id: dataset.id.clone(),
        method: config.method.name(),
        statistics,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{nantucket, nantucket_with_reference, NANTUCKET_MEAN};

    fn gini(config: EstimateConfig) -> f64 {
        estimate(&nantucket_with_reference(), &config, &[Statistic::Gini])
            .unwrap()
            .statistics
            .gini
            .unwrap()
    }

    #[test]
    fn table_ginis() {
        let cases = [
            (EstimateConfig::new(Method::Midpoint), 0.464),
            (EstimateConfig::new(Method::Step { tail: Some(TailKind::Rectangular) }), 0.438),
            (EstimateConfig::new(Method::Spline), 0.433),
            (EstimateConfig::mean_matched(Method::Midpoint), 0.510),
            (EstimateConfig::mean_matched(Method::Step { tail: None }), 0.537),
            (EstimateConfig::mean_matched(Method::Spline), 0.525),
        ];
        for (config, want) in cases {
            let got = gini(config.clone());
            assert!((got - want).abs() < 0.01, "{config:?}: {got}");
        }
    }

    #[test]
    fn explicit_mean_overrides_dataset() {
        let config = EstimateConfig {
            method: Method::Step { tail: None },
            mean_match: true,
            mean: Some(150_000.0),
        };
        let out = estimate(&nantucket_with_reference(), &config, &[Statistic::Mean]).unwrap();
        assert!((out.statistics.mean.unwrap() / 150_000.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mean_match_needs_a_mean() {
        let config = EstimateConfig::mean_matched(Method::Spline);
        assert!(matches!(
            estimate(&nantucket(), &config, &[Statistic::Gini]),
            Err(Error::Precondition(_))
        ));
        let config = EstimateConfig::mean_matched(Method::parametric_default());
        assert!(estimate(&nantucket_with_reference(), &config, &[Statistic::Gini]).is_err());
    }

    #[test]
    fn subdivide_stays_near_matched_mean() {
        let config = EstimateConfig::mean_matched(Method::Subdivide {
            tail: None,
            params: SubdivisionParams::default(),
        });
        let out = estimate(&nantucket_with_reference(), &config, &[Statistic::Mean, Statistic::Gini]).unwrap();
        // Smoothing moves mass within bins, so the matched mean drifts a little.
        let drift = out.statistics.mean.unwrap() / NANTUCKET_MEAN - 1.0;
        assert!(drift.abs() < 0.01, "{drift}");
    }

    #[test]
    fn parametric_reports_fits_and_weights() {
        let method = Method::Parametric {
            families: vec![Family::Gamma, Family::Dagum],
            choice: ModelChoice::AverageAic,
        };
        let out = estimate(&nantucket(), &EstimateConfig::new(method), &[Statistic::Gini]).unwrap();
        assert_eq!(out.diagnostics.fits.len(), 2);
        let total: f64 = out.diagnostics.model_weights.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(out.statistics.gini.unwrap() > 0.3);
    }

    #[test]
    fn midpoint_has_no_density() {
        assert!(fit_continuous(&nantucket(), &EstimateConfig::new(Method::Midpoint)).is_err());
    }
}
