//! Bundled example tables.

use crate::model::BinnedDataset;

/// Household incomes in Nantucket County, MA (ACS 2006–10, 2010 dollars).
/// Counts are population estimates from a 1-in-8 sample.
pub const NANTUCKET_EDGES: [f64; 16] = [
    0.0, 10_000.0, 15_000.0, 20_000.0, 25_000.0, 30_000.0, 35_000.0, 40_000.0, 45_000.0,
    50_000.0, 60_000.0, 75_000.0, 100_000.0, 125_000.0, 150_000.0, 200_000.0,
];

pub const NANTUCKET_COUNTS: [f64; 16] = [
    165.0, 109.0, 67.0, 147.0, 114.0, 91.0, 148.0, 44.0, 121.0, 159.0, 358.0, 625.0, 338.0,
    416.0, 200.0, 521.0,
];

/// Published county mean household income.
pub const NANTUCKET_MEAN: f64 = 137_811.0;

/// Published county Gini, computed before binning.
pub const NANTUCKET_GINI: f64 = 0.547;

/// The Nantucket table without its published mean or Gini attached.
pub fn nantucket() -> BinnedDataset {
    BinnedDataset::from_edges("nantucket", &NANTUCKET_EDGES, &NANTUCKET_COUNTS)
}

/// The Nantucket table with its published mean and Gini attached.
pub fn nantucket_with_reference() -> BinnedDataset {
    nantucket()
        .with_known_mean(NANTUCKET_MEAN)
        .with_reference_gini(NANTUCKET_GINI)
}
