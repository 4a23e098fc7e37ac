use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("column {0} has zero variance")]
    ConstantColumn(usize),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged {
        what: &'static str,
        iterations: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("adjacency weight diverges for pair ({0}, {1}): |r| = 1")]
    DivergentWeight(usize, usize),

    #[error("coefficient {0} is zero; grouping diagnostic needs both coefficients active")]
    InactiveCoefficient(usize),

    #[error("residual sum of squares is zero; BIC is undefined")]
    DegenerateRss,

    #[error("support size {target} unreachable: at most {reached} coefficients become active")]
    UnreachableSize { target: usize, reached: usize },

    #[error("invalid scenario: {0}")]
    InvalidSpec(String),

    #[error("series too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-positive price for asset {asset} on {date}")]
    NonPositivePrice { asset: String, date: String },

    #[error("dates are not strictly increasing at line {line}")]
    UnsortedDates { line: usize },

    #[error("grid point (lambda0={lambda0}, lambda1={lambda1}, lambda2={lambda2}): {source}")]
    Grid {
        lambda0: f64,
        lambda1: f64,
        lambda2: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
