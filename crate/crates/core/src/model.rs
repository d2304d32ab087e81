//! Binned income tables.
//!
//! A [`BinnedDataset`] is an ordered run of contiguous brackets `[lower, upper)`
//! with a (real-valued) count in each; only the last bracket may be open-ended.
//! Counts are reals so that published population estimates can be rescaled
//! (for example divided by a sampling fraction) without rounding.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One income bracket `[lower, upper)`. `upper == None` marks an open top bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: Option<f64>,
    pub count: f64,
}

impl Bin {
    pub fn new(lower: f64, upper: Option<f64>, count: f64) -> Self {
        Bin { lower, upper, count }
    }

    pub fn bounded(lower: f64, upper: f64, count: f64) -> Self {
        Bin::new(lower, Some(upper), count)
    }

    pub fn open(lower: f64, count: f64) -> Self {
        Bin::new(lower, None, count)
    }

    /// `(lower + upper) / 2`, or `None` for the open top bin.
    pub fn midpoint(&self) -> Option<f64> {
        self.upper.map(|u| 0.5 * (self.lower + u))
    }

    pub fn width(&self) -> Option<f64> {
        self.upper.map(|u| u - self.lower)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedDataset {
    pub id: String,
    pub bins: Vec<Bin>,
    pub known_mean: Option<f64>,
    pub reference_gini: Option<f64>,
}

/// A single broken invariant found by [`BinnedDataset::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoBins,
    NonFiniteValue { bin: usize },
    NegativeLower { bin: usize },
    NegativeCount { bin: usize },
    EmptyInterval { bin: usize },
    Gap { bin: usize, upper: f64, next_lower: f64 },
    OpenBinNotLast { bin: usize },
    ZeroTotal,
    TooFewPopulatedBins { populated: usize },
    ReferenceGiniOutOfRange { gini: f64 },
}

impl Violation {
    /// Structural violations make every estimator meaningless. The
    /// populated-bin rule only matters for the Pareto top-bin fit, so the
    /// estimators accept datasets that break only that rule.
    pub fn is_structural(&self) -> bool {
        !matches!(
            self,
            Violation::TooFewPopulatedBins { .. } | Violation::ReferenceGiniOutOfRange { .. }
        )
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoBins => write!(f, "no bins"),
            Violation::NonFiniteValue { bin } => write!(f, "bin {bin}: non-finite value"),
            Violation::NegativeLower { bin } => write!(f, "bin {bin}: negative lower bound"),
            Violation::NegativeCount { bin } => write!(f, "bin {bin}: negative count"),
            Violation::EmptyInterval { bin } => write!(f, "bin {bin}: upper bound not above lower bound"),
            Violation::Gap { bin, upper, next_lower } => write!(
                f,
                "gap between bins: bin {bin} ends at {upper} but bin {} starts at {next_lower}",
                bin + 1
            ),
            Violation::OpenBinNotLast { bin } => write!(f, "bin {bin}: only the last bin may be unbounded"),
            Violation::ZeroTotal => write!(f, "total count is zero"),
            Violation::TooFewPopulatedBins { populated } => {
                write!(f, "fewer than 2 populated bins ({populated})")
            }
            Violation::ReferenceGiniOutOfRange { gini } => {
                write!(f, "reference Gini {gini} outside [0, 1]")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn structurally_sound(&self) -> bool {
        self.violations.iter().all(|v| !v.is_structural())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Points `(income, F̂(income))` of the empirical CDF at the bin boundaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCdf {
    pub points: Vec<(f64, f64)>,
}

impl BinnedDataset {
    pub fn new(id: impl Into<String>, bins: Vec<Bin>) -> Self {
        BinnedDataset {
            id: id.into(),
            bins,
            known_mean: None,
            reference_gini: None,
        }
    }

    pub fn with_known_mean(mut self, mean: f64) -> Self {
        self.known_mean = Some(mean);
        self
    }

    pub fn with_reference_gini(mut self, gini: f64) -> Self {
        self.reference_gini = Some(gini);
        self
    }

    /// Builds a dataset from boundary edges and counts. `edges.len()` is
    /// `counts.len() + 1` for a bounded table, or `counts.len()` when the last
    /// bin is open.
    pub fn from_edges(id: impl Into<String>, edges: &[f64], counts: &[f64]) -> Self {
        let bins = counts
            .iter()
            .enumerate()
            .map(|(b, &n)| Bin::new(edges[b], edges.get(b + 1).copied(), n))
            .collect();
        BinnedDataset::new(id, bins)
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    pub fn populated_bins(&self) -> usize {
        self.bins.iter().filter(|b| b.count > 0.0).count()
    }

    pub fn top(&self) -> &Bin {
        self.bins.last().expect("dataset has bins")
    }

    pub fn has_open_top(&self) -> bool {
        self.bins.last().is_some_and(|b| b.upper.is_none())
    }

    /// Open top bin holding positive mass: the only case that needs a tail.
    pub fn has_populated_open_top(&self) -> bool {
        self.bins
            .last()
            .is_some_and(|b| b.upper.is_none() && b.count > 0.0)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.bins.is_empty() {
            violations.push(Violation::NoBins);
            return ValidationReport { violations };
        }
        let last = self.bins.len() - 1;
        for (i, bin) in self.bins.iter().enumerate() {
            if !bin.lower.is_finite() || !bin.count.is_finite() || bin.upper.is_some_and(|u| !u.is_finite()) {
                violations.push(Violation::NonFiniteValue { bin: i });
                continue;
            }
            if bin.lower < 0.0 {
                violations.push(Violation::NegativeLower { bin: i });
            }
            if bin.count < 0.0 {
                violations.push(Violation::NegativeCount { bin: i });
            }
            match bin.upper {
                Some(u) if u <= bin.lower => violations.push(Violation::EmptyInterval { bin: i }),
                None if i != last => violations.push(Violation::OpenBinNotLast { bin: i }),
                _ => {}
            }
            if i < last {
                if let Some(u) = bin.upper {
                    let next = self.bins[i + 1].lower;
                    if u != next {
                        violations.push(Violation::Gap {
                            bin: i,
                            upper: u,
                            next_lower: next,
                        });
                    }
                }
            }
        }
        if !(self.total() > 0.0) {
            violations.push(Violation::ZeroTotal);
        }
        let populated = self.populated_bins();
        if populated < 2 {
            violations.push(Violation::TooFewPopulatedBins { populated });
        }
        if let Some(g) = self.reference_gini {
            if !(0.0..=1.0).contains(&g) {
                violations.push(Violation::ReferenceGiniOutOfRange { gini: g });
            }
        }
        ValidationReport { violations }
    }

    /// Errors unless the dataset is structurally sound (see [`Violation::is_structural`]).
    pub fn check_structure(&self) -> Result<()> {
        let report = self.validate();
        if report.structurally_sound() {
            Ok(())
        } else {
            let violations = report.violations.into_iter().filter(Violation::is_structural).collect();
            Err(Error::InvalidDataset {
                id: self.id.clone(),
                report: ValidationReport { violations },
            })
        }
    }

    pub fn check_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.passed() {
            Ok(())
        } else {
            Err(Error::InvalidDataset {
                id: self.id.clone(),
                report,
            })
        }
    }

    /// `F̂` at `l_1` and at every finite upper bound. For an open top bin the
    /// last point sits at `l_B` with value `1 − n_B/T`.
    pub fn empirical_cdf(&self) -> Result<EmpiricalCdf> {
        self.check_structure()?;
        let total = self.total();
        let mut points = Vec::with_capacity(self.bins.len() + 1);
        points.push((self.bins[0].lower, 0.0));
        let mut cumulative = 0.0;
        for bin in &self.bins {
            cumulative += bin.count;
            if let Some(u) = bin.upper {
                points.push((u, cumulative / total));
            }
        }
        Ok(EmpiricalCdf { points })
    }

    /// Every boundary multiplied by `factor`; counts unchanged.
    pub fn scaled_boundaries(&self, factor: f64) -> BinnedDataset {
        let mut out = self.clone();
        for bin in &mut out.bins {
            bin.lower *= factor;
            bin.upper = bin.upper.map(|u| u * factor);
        }
        out
    }

    /// Every count divided by `divisor`.
    pub fn rescaled_counts(&self, divisor: f64) -> BinnedDataset {
        let mut out = self.clone();
        for bin in &mut out.bins {
            bin.count /= divisor;
        }
        out
    }
}

impl EmpiricalCdf {
    pub fn at(&self, income: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|(x, _)| *x == income)
            .map(|&(_, f)| f)
    }
}
