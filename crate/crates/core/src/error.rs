use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: String },

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("block level `{0}` has no members")]
    EmptyStratum(String),

    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),

    #[error("covariate covariance matrix is singular or not positive definite")]
    SingularCovariance,

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("block level `{level}` has {size} member(s); stratified resampling needs at least 2")]
    StratumTooSmall { level: String, size: usize },

    #[error("design point {n_l} is smaller than the number of block levels ({levels})")]
    DesignPointTooSmall { n_l: usize, levels: usize },

    #[error("loss {loss} exceeds the fixed bound {bound}")]
    LossExceedsBound { loss: f64, bound: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no feasible (c, d) pair for the bound curve")]
    AllDomainError,

    #[error("no model has |q - d_hat| <= {0}")]
    NoModelWithinT(f64),

    #[error("{n} rows is too few for {folds}-fold cross-validation")]
    TooFewRows { n: usize, folds: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Coarse category used by the command-line front end to pick an exit code.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Parse { .. } => {
                ErrorCategory::Input
            }
            Error::NonFinite { .. }
            | Error::LengthMismatch { .. }
            | Error::EmptyStratum(_)
            | Error::MissingColumn(_)
            | Error::ZeroVariance(_)
            | Error::SingularCovariance
            | Error::StratumTooSmall { .. }
            | Error::DesignPointTooSmall { .. }
            | Error::TooFewRows { .. } => ErrorCategory::Data,
            Error::LossExceedsBound { .. } | Error::Domain(_) | Error::AllDomainError => {
                ErrorCategory::Numeric
            }
            Error::NoModelWithinT(_) => ErrorCategory::Selection,
            Error::InvalidConfig(_) => ErrorCategory::Config,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Input,
    Data,
    Numeric,
    Selection,
}
