use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    /// Input that cannot be interpreted at all (wrong shapes, non-symmetric
    /// matrices). Distinct from a failed invariant check.
    #[error("malformed input `{field}`: {reason}")]
    Malformed { field: String, reason: String },

    #[error("validation failed for `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("{what} is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotSpd { what: String, min_eigenvalue: f64 },

    #[error("isotropy basis is not a subalgebra: [h{i}, h{j}] leaves the span by {residual:e}")]
    NotSubalgebra { i: usize, j: usize, residual: f64 },

    #[error("isotropy basis is rank deficient at vector {index}")]
    RankDeficient { index: usize },

    #[error("deformation parameter must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("{0} is singular")]
    Singular(String),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no certified t found up to t_max = {t_max:e}; best lower bound {best_value:e} at t = {best_t:e}")]
    NotCertifiedBelow {
        t_max: f64,
        best_t: f64,
        best_value: f64,
    },

    #[error("t grid must be non-empty, non-negative and strictly ascending: {0}")]
    BadGrid(String),
}

impl Error {
    pub(crate) fn dim(what: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected,
            found,
        }
    }

    pub(crate) fn malformed(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Malformed {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
