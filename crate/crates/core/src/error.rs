use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset `{id}`: {report}")]
    InvalidDataset { id: String, report: ValidationReport },

    #[error("{0}")]
    Precondition(String),

    #[error("top bin is empty; the Pareto shape is undefined")]
    EmptyTopBin,

    /// Even a degenerate tail overshoots the requested mean; the caller has to
    /// shrink the bin boundaries.
    #[error("no tail reproduces mean {target}: lower-bin mean alone is already {floor}")]
    NoTailSolution { target: f64, floor: f64 },

    #[error("mean {target} cannot be reached: the distribution has no free top-bin parameter and its mean is {attained}")]
    MeanUnreachable { target: f64, attained: f64 },

    #[error("moment of order {order} is undefined for this distribution")]
    UndefinedMoment { order: u32 },

    #[error("root finding failed: {0}")]
    RootNotFound(String),

    #[error("no parametric fit converged with finite moments")]
    NoViableFit,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
