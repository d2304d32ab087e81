//! Income statistics from binned income tables.
//!
//! A [`BinnedDataset`] holds household counts per income bracket. The
//! [`estimate`](estimate::estimate) entry point turns one into means, medians,
//! Gini and Theil indices and quantiles using midpoint, interpolated,
//! subdivided or parametric fits, optionally matched to a known mean. The
//! [`eval`] module scores methods against reference statistics.

pub mod error;
pub mod estimate;
pub mod eval;
pub mod fixtures;
pub mod interp;
pub mod io;
pub mod midpoint;
pub mod model;
pub mod parametric;
mod root;
pub mod stats;
pub mod subdivision;

pub use error::{Error, Result};
pub use model::{Bin, BinnedDataset};

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/binned-tables.md")]
    pub mod binned_tables {}
    #[doc = include_str!("../../../book/src/midpoint.md")]
    pub mod midpoint {}
    #[doc = include_str!("../../../book/src/interpolation.md")]
    pub mod interpolation {}
    #[doc = include_str!("../../../book/src/subdivision.md")]
    pub mod subdivision {}
    #[doc = include_str!("../../../book/src/parametric.md")]
    pub mod parametric {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    pub mod statistics {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    pub mod benchmarks {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    pub mod command_line {}
}
