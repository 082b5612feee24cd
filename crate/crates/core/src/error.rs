use thiserror::Error;

use crate::montecarlo::EnsembleStats;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("likelihood table construction failed: {0}")]
    Construction(String),

    /// The outcome being conditioned on has (numerically) zero probability.
    #[error("degenerate Bayes update: outcome mass {mass:e} is not positive")]
    DegenerateUpdate { mass: f64 },

    #[error(
        "posterior capacity exceeded: order {order} > cap {cap}, dropped energy fraction {dropped_fraction:e}"
    )]
    Capacity {
        order: usize,
        cap: usize,
        dropped_fraction: f64,
    },

    #[error("posterior has zero sharpness; the phase estimate is undefined")]
    UndefinedSignal,

    #[error("oracle limited to n <= {max}, got n = {n}")]
    OracleScale { n: usize, max: usize },

    #[error("record {index}: {source}")]
    Record {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    /// The record cap was hit before the requested precision; carries the
    /// statistics accumulated so far.
    #[error(
        "record cap reached after {} records: relative SE {achieved:.4} > target {target:.4}",
        stats.j
    )]
    PartialResult {
        stats: Box<EnsembleStats>,
        target: f64,
        achieved: f64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
