use std::path::PathBuf;

/// Errors raised while building meshes, operators, preconditioners or experiments.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate simplex {index} (zero volume)")]
    DegenerateSimplex { index: usize },

    #[error("factorization failed: singular pivot at index {index}")]
    SingularPivot { index: usize },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("subdomain {subdomain}: {source}")]
    Subdomain {
        subdomain: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error(
        "eigenpair {pair} has relative residual {residual:.3e} above tolerance {tolerance:.1e}"
    )]
    EigenResidual {
        pair: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("subdomain {subdomain} has an empty interface")]
    EmptyInterface { subdomain: usize },

    #[error("coarse space is empty")]
    EmptyCoarseSpace,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn in_subdomain(self, subdomain: usize) -> Self {
        Error::Subdomain {
            subdomain,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
