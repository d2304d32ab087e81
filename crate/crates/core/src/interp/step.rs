use serde::Serialize;

use super::tail::{TailKind, TailSpec};
use super::{lower_bins_contribution, shrink_boundaries, MeanConstraint, MeanMode};
use crate::error::{Error, Result};
use crate::model::BinnedDataset;
use crate::root::{bisect_until, expand, PARAM_REL_TOL};
use crate::stats::FittedDistribution;

/// Piecewise-constant density on finite support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepPdf {
    edges: Vec<f64>,
    heights: Vec<f64>,
    /// Cumulative probability at each edge.
    cumulative: Vec<f64>,
    /// Boundaries of the source bins (after any shrinking); the last entry is
    /// the end of the support.
    source_edges: Vec<f64>,
    tail: Option<TailSpec>,
    constraint: Option<MeanConstraint>,
}

impl StepPdf {
    /// Step density from raw edges and heights; each edge interval is its own
    /// source bin.
    pub fn new(edges: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        let source_edges = edges.clone();
        StepPdf::with_sources(edges, heights, source_edges)
    }

    pub(crate) fn with_sources(edges: Vec<f64>, heights: Vec<f64>, source_edges: Vec<f64>) -> Result<Self> {
        if edges.len() != heights.len() + 1 || heights.is_empty() {
            return Err(Error::Precondition("step density needs one more edge than heights".into()));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("step density edges must increase".into()));
        }
        if heights.iter().any(|h| !(*h >= 0.0) || !h.is_finite()) {
            return Err(Error::Precondition("step density heights must be finite and nonnegative".into()));
        }
        let mut cumulative = Vec::with_capacity(edges.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for (w, h) in edges.windows(2).zip(&heights) {
            acc += h * (w[1] - w[0]);
            cumulative.push(acc);
        }
        Ok(StepPdf {
            edges,
            heights,
            cumulative,
            source_edges,
            tail: None,
            constraint: None,
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn source_edges(&self) -> &[f64] {
        &self.source_edges
    }

    pub fn tail(&self) -> Option<&TailSpec> {
        self.tail.as_ref()
    }

    pub fn constraint(&self) -> Option<&MeanConstraint> {
        self.constraint.as_ref()
    }

    pub fn shrink_factor(&self) -> f64 {
        self.constraint.map_or(1.0, |c| c.shrink_factor)
    }

    pub fn total_mass(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    /// Probability in each source bin.
    pub fn source_bin_masses(&self) -> Vec<f64> {
        self.source_edges
            .windows(2)
            .map(|w| self.cdf(w[1]) - self.cdf(w[0]))
            .collect()
    }

    /// Mean, exact for a step density.
    pub fn mean(&self) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.heights)
            .map(|(w, h)| 0.5 * h * (w[1] * w[1] - w[0] * w[0]))
            .sum()
    }

    fn piece(&self, x: f64) -> Option<usize> {
        if x < self.edges[0] || x >= *self.edges.last().expect("non-empty") {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= x) - 1)
    }

    pub(crate) fn with_metadata(mut self, tail: Option<TailSpec>, constraint: Option<MeanConstraint>) -> Self {
        self.tail = tail;
        self.constraint = constraint;
        self
    }
}

impl FittedDistribution for StepPdf {
    fn cdf(&self, x: f64) -> f64 {
        if x <= self.edges[0] {
            return 0.0;
        }
        match self.piece(x) {
            Some(i) => self.cumulative[i] + self.heights[i] * (x - self.edges[i]),
            None => self.total_mass(),
        }
    }

    fn sf(&self, x: f64) -> f64 {
        self.total_mass() - self.cdf(x)
    }

    fn pdf(&self, x: f64) -> f64 {
        self.piece(x).map_or(0.0, |i| self.heights[i])
    }

    fn support(&self) -> (f64, f64) {
        (self.edges[0], *self.edges.last().expect("non-empty"))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.edges.clone()
    }

    fn piecewise_constant(&self) -> bool {
        true
    }
}

/// Tail parameter that makes the fitted mean equal `target_mean`.
///
/// `lower_contribution` is `Σ_{b<B} (n_b/T) m_b`. The solve runs on the
/// realized (rectangle) tail, so the resulting step density reproduces the
/// target itself, not just the idealized tail shape.
pub fn solve_tail(dataset: &BinnedDataset, lower_contribution: f64, kind: TailKind, target_mean: f64) -> Result<TailSpec> {
    let top = dataset.top();
    if top.upper.is_some() {
        return Err(Error::Precondition("tail fitting needs an open top bin".into()));
    }
    let share = top.count / dataset.total();
    let lower = top.lower;
    let floor = lower_contribution + share * lower;
    if !(share > 0.0) || target_mean <= floor {
        return Err(Error::NoTailSolution {
            target: target_mean,
            floor,
        });
    }
    let top_mean = (target_mean - lower_contribution) / share;
    let spec = |p: f64| TailSpec { kind, parameter: p };
    let parameter = match kind {
        TailKind::Rectangular => 2.0 * top_mean - lower,
        TailKind::Pareto => {
            if !(lower > 0.0) {
                return Err(Error::Precondition("a Pareto tail needs l_B > 0".into()));
            }
            // Realized mean falls as the shape grows.
            let gap = |a: f64| spec(a).realized_mean(lower) - top_mean;
            let hi = expand(1.0, 2.0, |a| gap(a) < 0.0)?;
            let lo = expand(hi, 0.5, |a| gap(a) > 0.0)?;
            bisect_log(gap, lo, hi)?
        }
        TailKind::Exponential => {
            let gap = |rate: f64| spec(rate).realized_mean(lower) - top_mean;
            let start = 1.0 / (top_mean - lower);
            let hi = expand(start, 2.0, |r| gap(r) < 0.0)?;
            let lo = expand(hi, 0.5, |r| gap(r) > 0.0)?;
            bisect_log(gap, lo, hi)?
        }
    };
    let out = spec(parameter);
    out.validate(lower)?;
    Ok(out)
}

/// Bisection in log space for a positive parameter; takes the bracket midpoint.
fn bisect_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    // A width of δ in ln(p) is a relative width of about δ in p.
    let (a, b) = bisect_until(|t: f64| f(t.exp()), lo.ln(), hi.ln(), |a, b| b - a <= PARAM_REL_TOL * 1e-3)?;
    Ok((0.5 * (a + b)).exp())
}

/// Step density through the empirical CDF with a mean-matched top-bin tail.
///
/// The tail defaults to Pareto for a known mean and rectangular for the ad hoc
/// mean. Without a populated open top bin the density stops at the last
/// boundary and the mean can only be matched by shrinking.
pub fn fit_step_pdf(dataset: &BinnedDataset, constraint: &MeanConstraint, tail: Option<TailKind>) -> Result<StepPdf> {
    dataset.check_structure()?;
    let kind = tail.unwrap_or(match constraint.mode {
        MeanMode::Known => TailKind::Pareto,
        MeanMode::AdHoc => TailKind::Rectangular,
    });
    let target = constraint.target_mean;
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::Precondition(format!("target mean must be positive, got {target}")));
    }
    let total = dataset.total();

    let (working, shrink, tail_spec) = if dataset.has_populated_open_top() {
        let body = lower_bins_contribution(dataset, total);
        match solve_tail(dataset, body, kind, target) {
            Ok(spec) => (dataset.clone(), 1.0, Some(spec)),
            Err(Error::NoTailSolution { .. }) => {
                let (shrunk, s) = shrink_boundaries(dataset, target)?;
                let body = lower_bins_contribution(&shrunk, total);
                let spec = solve_tail(&shrunk, body, kind, target)?;
                (shrunk, s, Some(spec))
            }
            Err(e) => return Err(e),
        }
    } else {
        let body = lower_bins_contribution(dataset, total);
        if target < body * (1.0 - 1e-12) {
            let (shrunk, s) = shrink_boundaries(dataset, target)?;
            (shrunk, s, None)
        } else if target > body * (1.0 + 1e-9) {
            return Err(Error::MeanUnreachable {
                target,
                attained: body,
            });
        } else {
            (dataset.clone(), 1.0, None)
        }
    };

    let mut edges = Vec::with_capacity(working.bins.len() + 33);
    let mut heights = Vec::with_capacity(working.bins.len() + 32);
    let mut source_edges = Vec::with_capacity(working.bins.len() + 1);
    edges.push(working.bins[0].lower);
    source_edges.push(working.bins[0].lower);
    for bin in &working.bins {
        match bin.upper {
            Some(u) => {
                heights.push(bin.count / total / (u - bin.lower));
                edges.push(u);
                source_edges.push(u);
            }
            None => {
                if let Some(spec) = tail_spec {
                    let (tail_edges, masses) = spec.rectangles(bin.lower, bin.count / total);
                    for (w, m) in tail_edges.windows(2).zip(&masses) {
                        heights.push(m / (w[1] - w[0]));
                        edges.push(w[1]);
                    }
                    source_edges.push(*tail_edges.last().expect("tail edges"));
                }
            }
        }
    }
    let applied = MeanConstraint {
        shrink_factor: shrink,
        ..*constraint
    };
    Ok(StepPdf::with_sources(edges, heights, source_edges)?.with_metadata(tail_spec, Some(applied)))
}
