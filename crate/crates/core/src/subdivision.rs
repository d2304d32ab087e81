//! Recursive subdivision of a step density.
//!
//! Each step `[e_b, e_{b+1})` of height `h_b` is split into three. The two
//! outer pieces, each `(1 − ε₂)/2` of the width, move a fraction `ε₁` of the
//! way toward the neighbouring heights; the middle piece takes whatever height
//! keeps the step's area unchanged. Zero-height neighbours are assumed beyond
//! both ends of the support, so the density tapers toward zero there. Steps
//! whose middle piece would go negative are left whole.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::StepPdf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubdivisionParams {
    pub eps1: f64,
    pub eps2: f64,
    pub rounds: u32,
}

impl Default for SubdivisionParams {
    fn default() -> Self {
        SubdivisionParams {
            eps1: 0.25,
            eps2: 0.75,
            rounds: 3,
        }
    }
}

impl SubdivisionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps1 > 0.0 && self.eps1 < 0.5) {
            return Err(Error::Precondition(format!("eps1 must be in (0, 0.5), got {}", self.eps1)));
        }
        if !(self.eps2 > 0.0 && self.eps2 < 1.0) {
            return Err(Error::Precondition(format!("eps2 must be in (0, 1), got {}", self.eps2)));
        }
        Ok(())
    }
}

/// One round of subdivision.
pub fn subdivide_once(pdf: &StepPdf, params: &SubdivisionParams) -> Result<StepPdf> {
    params.validate()?;
    subdivide_unchecked(pdf, params.eps1, params.eps2)
}

fn subdivide_unchecked(pdf: &StepPdf, eps1: f64, eps2: f64) -> Result<StepPdf> {
    let edges = pdf.edges();
    let heights = pdf.heights();
    let n = heights.len();
    let mut out_edges = Vec::with_capacity(3 * n + 1);
    let mut out_heights = Vec::with_capacity(3 * n);
    out_edges.push(edges[0]);
    for b in 0..n {
        let (lo, hi) = (edges[b], edges[b + 1]);
        let h = heights[b];
        let before = if b == 0 { 0.0 } else { heights[b - 1] };
        let after = if b + 1 == n { 0.0 } else { heights[b + 1] };
        let width = hi - lo;
        let side = 0.5 * (1.0 - eps2) * width;
        let centre = 0.5 * (lo + hi);
        let left_edge = centre - 0.5 * eps2 * width;
        let right_edge = centre + 0.5 * eps2 * width;
        let left = h + (before - h) * eps1;
        let right = h + (after - h) * eps1;
        let middle = (h * width - (left + right) * side) / (eps2 * width);
        if middle < 0.0 || !(left_edge > lo && right_edge > left_edge && hi > right_edge) {
            out_heights.push(h);
            out_edges.push(hi);
            continue;
        }
        out_heights.extend([left, middle, right]);
        out_edges.extend([left_edge, right_edge, hi]);
    }
    Ok(StepPdf::with_sources(out_edges, out_heights, pdf.source_edges().to_vec())?
        .with_metadata(pdf.tail().copied(), pdf.constraint().copied()))
}

/// `params.rounds` rounds of [`subdivide_once`]; each round uses the heights
/// left by the previous one as neighbours.
pub fn smooth_recursively(pdf: &StepPdf, params: &SubdivisionParams) -> Result<StepPdf> {
    params.validate()?;
    let mut current = pdf.clone();
    for _ in 0..params.rounds {
        current = subdivide_unchecked(&current, params.eps1, params.eps2)?;
    }
    Ok(current)
}
