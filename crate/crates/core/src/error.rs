use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Io => 1,
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numeric => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input is empty")]
    EmptyInput,

    #[error("unknown attack label `{0}`")]
    UnknownLabel(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("class `{0}` has no samples")]
    EmptyClass(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric (entry ({row}, {col}) differs by {diff:e})")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not positive definite after adding ridge {ridge:e}; try a larger ridge")]
    NotPositiveDefinite { ridge: f64 },

    #[error("degenerate kernel: centered Gram matrix is numerically zero")]
    DegenerateKernel,

    #[error("zero denominator in Rayleigh quotient")]
    ZeroDenominator,

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("{0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. }
            | Error::EmptyInput
            | Error::UnknownLabel(_)
            | Error::UnknownFeature(_)
            | Error::EmptyClass(_)
            | Error::DimensionMismatch { .. }
            | Error::Format(_) => ErrorKind::Data,
            Error::NotSymmetric { .. }
            | Error::NonFinite
            | Error::NotPositiveDefinite { .. }
            | Error::DegenerateKernel
            | Error::ZeroDenominator
            | Error::NonFiniteLoss { .. } => ErrorKind::Numeric,
            Error::InvalidArgument(_) | Error::Config(_) => ErrorKind::Config,
            Error::File { source, .. } => source.kind(),
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => ErrorKind::Io,
        }
    }

    /// Attach a file path to an error.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Error {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
