//! Interpolated CDFs.
//!
//! Both fits pass exactly through the empirical CDF, so each bin keeps its
//! observed share of the cases. Linear interpolation gives a step density
//! ([`StepPdf`]); monotone cubic Hermite interpolation gives a continuous,
//! piecewise-quadratic density ([`SplineCdf`]).
//!
//! The open top bin has one free parameter (a tail shape or a top knot). It is
//! solved so the fitted mean equals a target: the published grand mean when
//! known, otherwise the mean of a step fit whose top bin is closed at `2 l_B`.
//! When the target is below what the lower bins already imply, all bin
//! boundaries are shrunk toward zero by the largest factor `s < 1` that leaves
//! room for a small tail.

mod spline;
mod step;
mod tail;

pub use spline::{fit_spline_cdf, monotone_slopes, SplineCdf};
pub use step::{fit_step_pdf, solve_tail, StepPdf};
pub use tail::{TailKind, TailSpec, TAIL_QUANTILE, TAIL_RECTANGLES};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::BinnedDataset;
use crate::root::{bisect, PARAM_REL_TOL};

/// Smallest top-bin excess kept after shrinking: the tail's mean is at least
/// `(1 + SMALL_TAIL) · s · l_B`.
pub const SMALL_TAIL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeanMode {
    /// Published grand mean.
    Known,
    /// Stand-in mean from a step fit with the top bin closed at `2 l_B`.
    AdHoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanConstraint {
    pub mode: MeanMode,
    pub target_mean: f64,
    /// Boundary shrink factor applied by the fit; 1 unless the target was
    /// below the lower-bin mean.
    pub shrink_factor: f64,
}

impl MeanConstraint {
    pub fn known(mean: f64) -> Self {
        MeanConstraint {
            mode: MeanMode::Known,
            target_mean: mean,
            shrink_factor: 1.0,
        }
    }

    /// Ad hoc target for `dataset`. Without a populated open top bin there is
    /// nothing to close, and the target is the plain step mean.
    pub fn ad_hoc(dataset: &BinnedDataset) -> Result<Self> {
        let target = if dataset.has_populated_open_top() {
            ad_hoc_mean(dataset)?
        } else {
            dataset.check_structure()?;
            let total = dataset.total();
            lower_bins_contribution(dataset, total)
        };
        Ok(MeanConstraint {
            mode: MeanMode::AdHoc,
            target_mean: target,
            shrink_factor: 1.0,
        })
    }

    /// Known constraint from `mean` when present, ad hoc otherwise.
    pub fn from_optional(dataset: &BinnedDataset, mean: Option<f64>) -> Result<Self> {
        match mean {
            Some(m) => Ok(MeanConstraint::known(m)),
            None => MeanConstraint::ad_hoc(dataset),
        }
    }
}

/// `Σ_b (n_b/T) m_b` over the bounded bins.
pub(crate) fn lower_bins_contribution(dataset: &BinnedDataset, total: f64) -> f64 {
    dataset
        .bins
        .iter()
        .filter_map(|b| b.midpoint().map(|m| b.count / total * m))
        .sum()
}

/// Mean of a step density fit to every bin with the open top bin temporarily
/// closed at `2 l_B`.
pub fn ad_hoc_mean(dataset: &BinnedDataset) -> Result<f64> {
    dataset.check_structure()?;
    let top = dataset.top();
    if top.upper.is_some() {
        return Err(Error::Precondition("ad hoc mean needs an open top bin".into()));
    }
    if !(top.lower > 0.0) {
        return Err(Error::Precondition("ad hoc mean needs l_B > 0".into()));
    }
    let total = dataset.total();
    Ok(lower_bins_contribution(dataset, total) + top.count / total * 1.5 * top.lower)
}

/// Smallest mean a step fit can reach on `dataset` while keeping a small tail.
fn step_mean_floor(dataset: &BinnedDataset) -> f64 {
    let total = dataset.total();
    let body = lower_bins_contribution(dataset, total);
    if dataset.has_populated_open_top() {
        let top = dataset.top();
        body + top.count / total * (1.0 + SMALL_TAIL) * top.lower
    } else {
        body
    }
}

/// Shrinks every boundary by the largest `s ∈ (0, 1]` for which a step fit
/// can still reach `target_mean` with a small tail. Returns the shrunk dataset
/// and `s`.
pub fn shrink_boundaries(dataset: &BinnedDataset, target_mean: f64) -> Result<(BinnedDataset, f64)> {
    shrink_boundaries_with(dataset, target_mean, step_mean_floor)
}

/// As [`shrink_boundaries`], for any fit whose attainable-mean floor is given
/// by `floor`. `floor` must increase with the boundary scale.
pub fn shrink_boundaries_with<F>(dataset: &BinnedDataset, target_mean: f64, floor: F) -> Result<(BinnedDataset, f64)>
where
    F: Fn(&BinnedDataset) -> f64,
{
    dataset.check_structure()?;
    if !(target_mean > 0.0) {
        return Err(Error::Precondition(format!("target mean must be positive, got {target_mean}")));
    }
    if floor(dataset) <= target_mean {
        return Ok((dataset.clone(), 1.0));
    }
    let excess = |s: f64| floor(&dataset.scaled_boundaries(s)) - target_mean;
    let mut lo = 0.5;
    while excess(lo) > 0.0 {
        lo *= 0.5;
        if lo < 1e-12 {
            return Err(Error::RootNotFound("no shrink factor reaches the target mean".into()));
        }
    }
    let (s, _) = bisect(excess, lo, 1.0, PARAM_REL_TOL)?;
    Ok((dataset.scaled_boundaries(s), s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::nantucket;
    use crate::model::Bin;
    use approx::assert_relative_eq;

    #[test]
    fn ad_hoc_two_bins() {
        let d = BinnedDataset::from_edges("t", &[0.0, 10.0], &[1.0, 1.0]);
        assert_relative_eq!(ad_hoc_mean(&d).unwrap(), 10.0, max_relative = 1e-15);
    }

    #[test]
    fn ad_hoc_all_mass_on_top() {
        let d = BinnedDataset::from_edges("t", &[0.0, 10.0], &[0.0, 4.0]);
        assert_relative_eq!(ad_hoc_mean(&d).unwrap(), 15.0, max_relative = 1e-15);
    }

    #[test]
    fn ad_hoc_nantucket_matches_brute_force() {
        // Independent oracle: average of a fine uniform-within-bin sample.
        let d = nantucket();
        let mut edges: Vec<f64> = d.bins.iter().map(|b| b.lower).collect();
        edges.push(400_000.0);
        let mut acc = 0.0;
        let k = 1000;
        for (i, bin) in d.bins.iter().enumerate() {
            let (a, b) = (edges[i], edges[i + 1]);
            for j in 0..k {
                acc += bin.count / k as f64 * (a + (b - a) * (j as f64 + 0.5) / k as f64);
            }
        }
        let oracle = acc / d.total();
        let got = ad_hoc_mean(&d).unwrap();
        assert_relative_eq!(got, oracle, max_relative = 1e-12);
        assert!(got > 0.0 && got < 400_000.0);
        assert!((got - 110_419.54).abs() < 0.01);
    }

    #[test]
    fn ad_hoc_rejects_bounded_top() {
        let d = BinnedDataset::from_edges("t", &[0.0, 10.0, 20.0], &[1.0, 1.0]);
        assert!(ad_hoc_mean(&d).is_err());
    }

    #[test]
    fn no_shrink_needed() {
        let d = nantucket();
        let (out, s) = shrink_boundaries(&d, 137_811.0).unwrap();
        assert_eq!(s, 1.0);
        assert_eq!(out, d);
    }

    #[test]
    fn shrink_with_empty_top_is_linear() {
        let d = BinnedDataset::from_edges("z", &[0.0, 10.0, 20.0, 30.0], &[1.0, 2.0, 3.0, 0.0]);
        let body = lower_bins_contribution(&d, d.total());
        let (_, s) = shrink_boundaries(&d, body / 1.01).unwrap();
        assert!((s - 1.0 / 1.01).abs() < 1e-9, "{s}");
    }

    #[test]
    fn shrink_matches_brute_force_scan() {
        let d = BinnedDataset::new(
            "county",
            vec![
                Bin::bounded(0.0, 10_000.0, 120.0),
                Bin::bounded(10_000.0, 25_000.0, 300.0),
                Bin::bounded(25_000.0, 50_000.0, 420.0),
                Bin::bounded(50_000.0, 100_000.0, 260.0),
                Bin::open(100_000.0, 2.0),
            ],
        );
        let body = lower_bins_contribution(&d, d.total());
        let target = body * (1.0 - 0.003);
        let (_, s) = shrink_boundaries(&d, target).unwrap();
        assert!(s > 0.99 && s < 1.0, "{s}");
        assert_relative_eq!(s, target / step_mean_floor(&d), max_relative = 1e-8);
        // Largest s on a 1e-6 grid whose floor does not exceed the target.
        let mut scan = 1.0;
        while step_mean_floor(&d.scaled_boundaries(scan)) > target {
            scan -= 1e-6;
        }
        assert!((s - scan).abs() <= 1.1e-6, "{s} vs {scan}");
    }

    #[test]
    fn shrink_rejects_nonpositive_target() {
        assert!(shrink_boundaries(&nantucket(), 0.0).is_err());
    }
}
