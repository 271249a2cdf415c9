use std::path::PathBuf;

use crate::topology::{ApId, StationId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid channel chain: {0}")]
    InvalidChain(String),

    #[error("invalid arrival law: {0}")]
    InvalidArrivals(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown policy `{0}` (expected maxweight, maxqueue, maxcsi or random)")]
    UnknownPolicy(String),

    #[error("transmission set {0} activates conflicting access points")]
    NotIndependent(String),

    #[error("station {station} is not associated with access point {ap}")]
    ForeignStation { ap: ApId, station: StationId },

    #[error("access point {0} is active but has no station selection")]
    MissingSelection(ApId),

    #[error("access point {0} has no associated stations")]
    NoStations(ApId),

    #[error("state space has {count:.3e} states, above the cap of {cap}; shrink the scenario or raise the cap")]
    StateCapExceeded { count: f64, cap: usize },

    #[error("lookahead of depth {depth} would evaluate about {cost:.3e} outcomes, above the cap of {cap:.3e}")]
    DepthCapExceeded { depth: usize, cost: f64, cap: f64 },

    #[error("transition distribution sums to {0}, expected 1")]
    NotNormalized(f64),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::StateCapExceeded { .. } | Error::DepthCapExceeded { .. } => 3,
            Error::Io { .. } => 4,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
