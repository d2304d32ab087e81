use serde::Serialize;

use crate::error::{Error, Result};

/// `100 (estimate − reference) / reference`.
pub fn percent_error(estimate: f64, reference: f64) -> Result<f64> {
    if reference == 0.0 || !reference.is_finite() {
        return Err(Error::Precondition(format!("reference must be finite and non-zero, got {reference}")));
    }
    Ok(100.0 * (estimate - reference) / reference)
}

/// Accuracy of a set of estimates against their references, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccuracyMetrics {
    pub n: usize,
    /// Mean percent error.
    pub bias: f64,
    /// Root mean squared percent error.
    pub rmse: f64,
    /// Squared correlation of estimates with references; absent when either
    /// side has zero variance or fewer than two pairs are available.
    pub reliability: Option<f64>,
}

/// Metrics over `(estimate, reference)` pairs.
pub fn aggregate(pairs: &[(f64, f64)]) -> Result<AccuracyMetrics> {
    if pairs.is_empty() {
        return Err(Error::Precondition("nothing to aggregate".into()));
    }
    let errors = pairs
        .iter()
        .map(|&(e, r)| percent_error(e, r))
        .collect::<Result<Vec<f64>>>()?;
    let n = errors.len() as f64;
    let bias = errors.iter().sum::<f64>() / n;
    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    Ok(AccuracyMetrics {
        n: pairs.len(),
        bias,
        rmse,
        reliability: squared_correlation(pairs),
    })
}

fn squared_correlation(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    // The (n − 1) normalizations cancel in the ratio.
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy * sxy / (sxx * syy)).min(1.0))
}
