use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("eigensolver or SVD did not converge within {iterations} iterations")]
    NumericalFailure { iterations: usize },

    #[error("matrix is singular or rank-deficient (smallest eigenvalue {min_eigenvalue:e}, threshold {threshold:e})")]
    SingularMatrix { min_eigenvalue: f64, threshold: f64 },

    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("expected numerical rank {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("requested rank {requested} exceeds available rank {available}")]
    RankTooLarge { requested: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("diagonal entry {index} is not positive ({value:e})")]
    NonPositiveDiagonal { index: usize, value: f64 },

    #[error("{what} did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NoConvergence { what: &'static str, iterations: usize, gradient_norm: f64 },

    #[error("degenerate design: all feature columns are constant")]
    DegenerateDesign,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch { expected: expected.to_string(), found: found.to_string() }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Variant name of the innermost error, for machine-readable messages.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Error::NumericalFailure { .. } => "NumericalFailure",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::NotPsd { .. } => "NotPsd",
            Error::RankMismatch { .. } => "RankMismatch",
            Error::RankTooLarge { .. } => "RankTooLarge",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonPositiveDiagonal { .. } => "NonPositiveDiagonal",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DegenerateDesign => "DegenerateDesign",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Fold { source, .. } | Error::Stage { source, .. } => source.kind_name(),
            Error::Parse { .. } => "Parse",
            Error::Io { .. } => "Io",
        }
    }

    /// True when the error stems from a numerical precondition or solver
    /// failure rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NumericalFailure { .. }
            | Error::SingularMatrix { .. }
            | Error::NotPsd { .. }
            | Error::RankMismatch { .. }
            | Error::RankTooLarge { .. }
            | Error::NonPositiveDiagonal { .. }
            | Error::NoConvergence { .. }
            | Error::DegenerateDesign => true,
            Error::Fold { source, .. } | Error::Stage { source, .. } => source.is_numerical(),
            Error::DimensionMismatch { .. } | Error::InvalidInput(_) | Error::Parse { .. } | Error::Io { .. } => false,
        }
    }
}
