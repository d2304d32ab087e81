use serde::Serialize;

use super::{shrink_boundaries_with, MeanConstraint, MeanMode, SMALL_TAIL};
use crate::error::{Error, Result};
use crate::model::BinnedDataset;
use crate::root::{bisect, expand, PARAM_REL_TOL};
use crate::stats::FittedDistribution;

/// Monotone cubic Hermite CDF through the empirical CDF points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplineCdf {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    constraint: Option<MeanConstraint>,
}

/// Knot derivatives for a monotone, continuously differentiable cubic
/// interpolant of nondecreasing data.
///
/// Interior slopes start from the three-point finite difference and the end
/// slopes from the one-sided three-point formula (floored at zero). Each
/// segment is then limited: a flat segment forces zero slope at both ends, and
/// `(d_k/δ_k, d_{k+1}/δ_k)` is pulled back inside the circle of radius 3.
pub fn monotone_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert!(n >= 2 && ys.len() == n, "need at least two knots");
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let secant: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    if n == 2 {
        return vec![secant[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (h[i] * secant[i - 1] + h[i - 1] * secant[i]) / (h[i - 1] + h[i]);
    }
    d[0] = (((2.0 * h[0] + h[1]) * secant[0] - h[0] * secant[1]) / (h[0] + h[1])).max(0.0);
    let (a, b) = (h[n - 2], h[n - 3]);
    d[n - 1] = (((2.0 * a + b) * secant[n - 2] - a * secant[n - 3]) / (a + b)).max(0.0);

    for k in 0..n - 1 {
        if secant[k] == 0.0 {
            d[k] = 0.0;
            d[k + 1] = 0.0;
        }
    }
    for k in 0..n - 1 {
        if secant[k] == 0.0 {
            continue;
        }
        let alpha = d[k] / secant[k];
        let beta = d[k + 1] / secant[k];
        let r2 = alpha * alpha + beta * beta;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            d[k] = tau * alpha * secant[k];
            d[k + 1] = tau * beta * secant[k];
        }
    }
    d
}

impl SplineCdf {
    /// Builds the interpolant through `(knots, values)`; `values` must be
    /// nondecreasing from 0 to 1.
    pub fn through(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::Precondition("spline needs at least two knots".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("spline knots must increase".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Precondition("spline values must be nondecreasing".into()));
        }
        let slopes = monotone_slopes(&knots, &values);
        Ok(SplineCdf {
            knots,
            values,
            slopes,
            constraint: None,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn constraint(&self) -> Option<&MeanConstraint> {
        self.constraint.as_ref()
    }

    pub fn shrink_factor(&self) -> f64 {
        self.constraint.map_or(1.0, |c| c.shrink_factor)
    }

    /// `∫ x dF`, exact: `x_last − ∫ F` with the Hermite integral per segment.
    pub fn mean(&self) -> f64 {
        let n = self.knots.len();
        let start = self.knots[0];
        let end = self.knots[n - 1];
        let mut integral_f = 0.0;
        for i in 0..n - 1 {
            let h = self.knots[i + 1] - self.knots[i];
            integral_f += 0.5 * h * (self.values[i] + self.values[i + 1])
                + h * h * (self.slopes[i] - self.slopes[i + 1]) / 12.0;
        }
        // F is 0 before the first knot and 1 after the last.
        end * self.values[n - 1] - start * self.values[0] - integral_f
    }

    fn segment(&self, x: f64) -> Option<usize> {
        let n = self.knots.len();
        if x < self.knots[0] || x >= self.knots[n - 1] {
            return None;
        }
        Some(self.knots.partition_point(|&k| k <= x) - 1)
    }
}

impl FittedDistribution for SplineCdf {
    fn cdf(&self, x: f64) -> f64 {
        if x <= self.knots[0] {
            return 0.0;
        }
        let Some(i) = self.segment(x) else {
            return *self.values.last().expect("knots");
        };
        let h = self.knots[i + 1] - self.knots[i];
        let t = (x - self.knots[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.values[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1]
    }

    fn sf(&self, x: f64) -> f64 {
        *self.values.last().expect("knots") - self.cdf(x)
    }

    fn pdf(&self, x: f64) -> f64 {
        let Some(i) = self.segment(x) else {
            return 0.0;
        };
        let h = self.knots[i + 1] - self.knots[i];
        let t = (x - self.knots[i]) / h;
        let t2 = t * t;
        let density = (6.0 * t2 - 6.0 * t) * (self.values[i] - self.values[i + 1]) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * self.slopes[i]
            + (3.0 * t2 - 2.0 * t) * self.slopes[i + 1];
        density.max(0.0)
    }

    fn support(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().expect("knots"))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.knots.clone()
    }
}

/// Empirical CDF points of the lower bins, with the top bin's lower bound as
/// the last point when the top bin is open.
fn body_knots(dataset: &BinnedDataset) -> Result<(Vec<f64>, Vec<f64>)> {
    let cdf = dataset.empirical_cdf()?;
    Ok(cdf.points.into_iter().unzip())
}

fn with_top_knot(xs: &[f64], ys: &[f64], top: f64) -> Result<SplineCdf> {
    let mut knots = xs.to_vec();
    let mut values = ys.to_vec();
    knots.push(top);
    values.push(1.0);
    SplineCdf::through(knots, values)
}

/// Smallest mean a spline on `dataset` reaches with its top knot just above `l_B`.
fn spline_mean_floor(dataset: &BinnedDataset, relative_gap: f64) -> f64 {
    let Ok((xs, ys)) = body_knots(dataset) else {
        return f64::INFINITY;
    };
    if dataset.has_populated_open_top() {
        let lower = dataset.top().lower;
        with_top_knot(&xs, &ys, lower * (1.0 + relative_gap)).map_or(f64::INFINITY, |s| s.mean())
    } else {
        SplineCdf::through(xs, ys).map_or(f64::INFINITY, |s| s.mean())
    }
}

/// Solves the top knot `U ≥ (1 + SMALL_TAIL) l_B` so the spline mean equals
/// `target`, or reports that even the smallest admissible knot overshoots.
///
/// The mean is not monotone in `U` as `U → l_B`: a very short top segment
/// steepens the slope at `l_B` and pushes mass up in the bin below. Keeping
/// the knot a small tail above `l_B` also matches the floor used for
/// shrinking.
fn solve_top_knot(dataset: &BinnedDataset, target: f64) -> Result<SplineCdf> {
    let (xs, ys) = body_knots(dataset)?;
    let lower = dataset.top().lower;
    let mean_at = |u: f64| with_top_knot(&xs, &ys, u).map_or(f64::NAN, |s| s.mean());
    let lo = lower * (1.0 + SMALL_TAIL);
    let floor = mean_at(lo);
    if !(floor < target) {
        return Err(Error::NoTailSolution { target, floor });
    }
    let share = dataset.top().count / dataset.total();
    let guess_excess = ((target - floor) / share).max(lower * 1e-3);
    let excess = expand(guess_excess, 2.0, |e| mean_at(lower + e) >= target)?;
    let (a, b) = bisect(|u| mean_at(u) - target, lo, lower + excess, PARAM_REL_TOL * 1e-3)?;
    with_top_knot(&xs, &ys, 0.5 * (a + b))
}

/// Monotone cubic spline through the empirical CDF, with the top knot placed
/// so the fitted mean matches the constraint.
///
/// Under an ad hoc constraint the target is the step-based ad hoc mean, so the
/// spline and step fits share a mean. Datasets without a populated open top
/// bin have no free knot: an ad hoc constraint then keeps the spline's own
/// mean, and a known mean can only be matched by shrinking.
pub fn fit_spline_cdf(dataset: &BinnedDataset, constraint: &MeanConstraint) -> Result<SplineCdf> {
    dataset.check_structure()?;
    let target = constraint.target_mean;
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::Precondition(format!("target mean must be positive, got {target}")));
    }
    let floor = |d: &BinnedDataset| spline_mean_floor(d, SMALL_TAIL);

    let (mut spline, shrink) = if dataset.has_populated_open_top() {
        match solve_top_knot(dataset, target) {
            Ok(s) => (s, 1.0),
            Err(Error::NoTailSolution { .. }) => {
                let (shrunk, s) = shrink_boundaries_with(dataset, target, floor)?;
                (solve_top_knot(&shrunk, target)?, s)
            }
            Err(e) => return Err(e),
        }
    } else {
        let (xs, ys) = body_knots(dataset)?;
        let natural = SplineCdf::through(xs, ys)?;
        let attained = natural.mean();
        if constraint.mode == MeanMode::AdHoc {
            (natural, 1.0)
        } else if target < attained * (1.0 - 1e-12) {
            let (shrunk, s) = shrink_boundaries_with(dataset, target, floor)?;
            let (xs, ys) = body_knots(&shrunk)?;
            (SplineCdf::through(xs, ys)?, s)
        } else if target > attained * (1.0 + 1e-9) {
            return Err(Error::MeanUnreachable { target, attained });
        } else {
            (natural, 1.0)
        }
    };
    spline.constraint = Some(MeanConstraint {
        shrink_factor: shrink,
        target_mean: if constraint.mode == MeanMode::AdHoc && !dataset.has_populated_open_top() {
            spline.mean()
        } else {
            target
        },
        ..*constraint
    });
    Ok(spline)
}
