//! Robust Pareto midpoint estimator.
//!
//! Every case in a bounded bin sits at the bin midpoint. The open top bin gets
//! a pseudo-midpoint: either the harmonic mean `l_B (1 + 1/α)` of a Pareto tail
//! fitted to the top two bins, or, when the grand mean is known, whatever value
//! makes the weighted mean reproduce it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Bin, BinnedDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TopBinStrategy {
    /// Harmonic mean of a Pareto tail; defined for every α > 0.
    HarmonicPareto,
    /// Top value chosen so the weighted mean equals a known grand mean.
    MeanMatched,
    /// Arithmetic Pareto mean `l_B α/(α−1)`. Unstable near α = 1; kept only
    /// for comparisons.
    ArithmeticPareto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MidpointOptions {
    pub strategy: TopBinStrategy,
    pub target_mean: Option<f64>,
}

impl MidpointOptions {
    pub fn harmonic() -> Self {
        MidpointOptions {
            strategy: TopBinStrategy::HarmonicPareto,
            target_mean: None,
        }
    }

    pub fn mean_matched(mean: f64) -> Self {
        MidpointOptions {
            strategy: TopBinStrategy::MeanMatched,
            target_mean: Some(mean),
        }
    }

    pub fn arithmetic() -> Self {
        MidpointOptions {
            strategy: TopBinStrategy::ArithmeticPareto,
            target_mean: None,
        }
    }
}

impl Default for MidpointOptions {
    fn default() -> Self {
        MidpointOptions::harmonic()
    }
}

/// Incomes with case weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedPointMass {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    /// Set when a mean-matched top value landed below `l_B`. The value is
    /// still used as is.
    pub top_below_lower_bound: bool,
}

impl WeightedPointMass {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Self {
        assert_eq!(values.len(), weights.len(), "values and weights differ in length");
        WeightedPointMass {
            values,
            weights,
            top_below_lower_bound: false,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        let w = self.total_weight();
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum::<f64>()
            / w
    }
}

/// Pareto shape from the top two bins:
/// `α̂ = ln((n_{B−1} + n_B)/n_B) / ln(l_B/l_{B−1})`.
pub fn pareto_alpha(dataset: &BinnedDataset) -> Result<f64> {
    let b = dataset.bins.len();
    if b < 2 {
        return Err(Error::Precondition("the Pareto shape needs at least two bins".into()));
    }
    let (below, top) = (&dataset.bins[b - 2], &dataset.bins[b - 1]);
    if !(top.count > 0.0) {
        return Err(Error::EmptyTopBin);
    }
    if !(below.lower > 0.0) {
        return Err(Error::Precondition(
            "the second-highest bin starts at zero; the Pareto shape is undefined".into(),
        ));
    }
    if !(top.lower > below.lower) {
        return Err(Error::Precondition("top two bins are not increasing".into()));
    }
    Ok(((below.count + top.count) / top.count).ln() / (top.lower / below.lower).ln())
}

/// Harmonic mean of a Pareto tail starting at `lower`: `lower (1 + 1/α)`.
pub fn top_pseudo_midpoint_harmonic(lower: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !(lower > 0.0) {
        return Err(Error::Precondition(format!(
            "harmonic pseudo-midpoint needs α > 0 and l_B > 0 (got α = {alpha}, l_B = {lower})"
        )));
    }
    Ok(lower * (1.0 + 1.0 / alpha))
}

/// Arithmetic Pareto mean `lower α/(α−1)`; requires α > 1.
pub fn top_pseudo_midpoint_arithmetic(lower: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::UndefinedMoment { order: 1 });
    }
    Ok(lower * alpha / (alpha - 1.0))
}

/// Top value that makes the midpoint mean hit the grand mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanMatchedTop {
    pub value: f64,
    pub below_lower_bound: bool,
}

/// `μ̂_B = (T μ − Σ_{b<B} n_b m_b) / n_B`.
pub fn top_pseudo_midpoint_mean_matched(dataset: &BinnedDataset, grand_mean: f64) -> Result<MeanMatchedTop> {
    dataset.check_structure()?;
    if !(grand_mean > 0.0) {
        return Err(Error::Precondition(format!("grand mean must be positive, got {grand_mean}")));
    }
    let (top, lower_bins) = dataset.bins.split_last().expect("structure checked");
    if !(top.count > 0.0) {
        return Err(Error::EmptyTopBin);
    }
    let lower_sum: f64 = lower_bins
        .iter()
        .map(|b| b.count * b.midpoint().expect("only the top bin is open"))
        .sum();
    let value = (dataset.total() * grand_mean - lower_sum) / top.count;
    Ok(MeanMatchedTop {
        value,
        below_lower_bound: value < top.lower,
    })
}

/// Point mass at bin midpoints, with the top bin placed per `options`.
pub fn midpoint_point_mass(dataset: &BinnedDataset, options: &MidpointOptions) -> Result<WeightedPointMass> {
    dataset.check_structure()?;
    let bins: &[Bin] = match dataset.bins.split_last() {
        // Nothing to place in an empty open top bin.
        Some((top, rest)) if top.upper.is_none() && top.count == 0.0 && !rest.is_empty() => rest,
        _ => &dataset.bins,
    };
    let mut values = Vec::with_capacity(bins.len());
    let mut weights = Vec::with_capacity(bins.len());
    let mut below = false;
    for bin in bins {
        let value = match bin.midpoint() {
            Some(m) => m,
            None => match options.strategy {
                TopBinStrategy::HarmonicPareto => {
                    top_pseudo_midpoint_harmonic(bin.lower, pareto_alpha(dataset)?)?
                }
                TopBinStrategy::ArithmeticPareto => {
                    top_pseudo_midpoint_arithmetic(bin.lower, pareto_alpha(dataset)?)?
                }
                TopBinStrategy::MeanMatched => {
                    let mean = options.target_mean.ok_or_else(|| {
                        Error::Precondition("mean-matched midpoints need a target mean".into())
                    })?;
                    let top = top_pseudo_midpoint_mean_matched(dataset, mean)?;
                    below = top.below_lower_bound;
                    top.value
                }
            },
        };
        values.push(value);
        weights.push(bin.count);
    }
    Ok(WeightedPointMass {
        values,
        weights,
        top_below_lower_bound: below,
    })
}
