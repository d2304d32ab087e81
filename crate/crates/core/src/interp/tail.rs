//! Top-bin tails.
//!
//! Exponential and Pareto tails are realized as a run of rectangles of
//! decreasing height so that a fitted density stays a step function. The
//! rectangles sit on a geometric grid from `l_B` to the tail's 0.999 quantile;
//! each carries the tail's probability on its cell, rescaled so the run holds
//! the full top-bin mass.

use serde::Serialize;

use crate::error::{Error, Result};

pub const TAIL_RECTANGLES: usize = 32;
pub const TAIL_QUANTILE: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TailKind {
    Rectangular,
    Exponential,
    Pareto,
}

impl std::str::FromStr for TailKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rectangular" => Ok(TailKind::Rectangular),
            "exponential" => Ok(TailKind::Exponential),
            "pareto" => Ok(TailKind::Pareto),
            other => Err(format!("unknown tail `{other}`")),
        }
    }
}

impl std::fmt::Display for TailKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TailKind::Rectangular => "rectangular",
            TailKind::Exponential => "exponential",
            TailKind::Pareto => "pareto",
        })
    }
}

/// A one-parameter top-bin shape.
///
/// `parameter` is the finite top edge for [`TailKind::Rectangular`], the rate
/// for [`TailKind::Exponential`] and the shape for [`TailKind::Pareto`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSpec {
    pub kind: TailKind,
    pub parameter: f64,
}

impl TailSpec {
    pub fn validate(&self, lower: f64) -> Result<()> {
        let ok = match self.kind {
            TailKind::Rectangular => self.parameter > lower && self.parameter.is_finite(),
            TailKind::Exponential => self.parameter > 0.0 && self.parameter.is_finite(),
            TailKind::Pareto => self.parameter > 0.0 && self.parameter.is_finite() && lower > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "invalid {} tail parameter {} above {lower}",
                self.kind, self.parameter
            )))
        }
    }

    /// Survival function of the unrealized tail, relative to `lower`.
    fn survival(&self, lower: f64, x: f64) -> f64 {
        match self.kind {
            TailKind::Rectangular => ((self.parameter - x) / (self.parameter - lower)).clamp(0.0, 1.0),
            TailKind::Exponential => (-self.parameter * (x - lower)).exp(),
            TailKind::Pareto => (lower / x).powf(self.parameter),
        }
    }

    fn cutoff(&self, lower: f64) -> f64 {
        let remaining = 1.0 - TAIL_QUANTILE;
        match self.kind {
            TailKind::Rectangular => self.parameter,
            TailKind::Exponential => lower - remaining.ln() / self.parameter,
            TailKind::Pareto => lower * remaining.powf(-1.0 / self.parameter),
        }
    }

    /// Edges and per-rectangle masses of the realized tail above `lower`,
    /// holding `mass` in total.
    pub fn rectangles(&self, lower: f64, mass: f64) -> (Vec<f64>, Vec<f64>) {
        if self.kind == TailKind::Rectangular {
            return (vec![lower, self.parameter], vec![mass]);
        }
        let top = self.cutoff(lower);
        let n = TAIL_RECTANGLES;
        let edges: Vec<f64> = if lower > 0.0 {
            let ratio = (top / lower).ln() / n as f64;
            (0..=n)
                .map(|i| if i == n { top } else { lower * (ratio * i as f64).exp() })
                .collect()
        } else {
            (0..=n).map(|i| top * i as f64 / n as f64).collect()
        };
        let raw: Vec<f64> = edges
            .windows(2)
            .map(|w| self.survival(lower, w[0]) - self.survival(lower, w[1]))
            .collect();
        let sum: f64 = raw.iter().sum();
        let masses = raw.into_iter().map(|m| m / sum * mass).collect();
        (edges, masses)
    }

    /// Mean of the realized tail (conditional on being in the top bin).
    pub fn realized_mean(&self, lower: f64) -> f64 {
        let (edges, masses) = self.rectangles(lower, 1.0);
        edges
            .windows(2)
            .zip(&masses)
            .map(|(w, m)| m * 0.5 * (w[0] + w[1]))
            .sum()
    }

    /// Mean of the untruncated tail shape; `+∞` for a Pareto shape ≤ 1.
    pub fn analytic_mean(&self, lower: f64) -> f64 {
        match self.kind {
            TailKind::Rectangular => 0.5 * (lower + self.parameter),
            TailKind::Exponential => lower + 1.0 / self.parameter,
            TailKind::Pareto if self.parameter > 1.0 => lower * self.parameter / (self.parameter - 1.0),
            TailKind::Pareto => f64::INFINITY,
        }
    }
}
