use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("at least one link is required to compute a blockage expectation")]
    EmptyLinks,

    #[error("all links must share the base-station endpoint")]
    LinksNotConcurrent,

    #[error(
        "combinatorial blow-up: {points} points exceed the exact inclusion-exclusion cap of {cap}; \
         use the kN-MAP estimator for large measurement sets"
    )]
    CombinatorialBlowUp { points: usize, cap: usize },

    #[error("no measurements available for this estimator")]
    NoData,

    #[error("measurement set has zero model probability; the posterior is undefined")]
    DegenerateEvidence,

    #[error(
        "no lattice pitch yields exactly {requested} in-disk points (nearest achievable: {below:?} and {above:?})"
    )]
    GridUnachievable {
        requested: usize,
        below: Option<usize>,
        above: Option<usize>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("degenerate polygon: fewer than three distinct non-collinear vertices")]
    DegeneratePolygon,

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
