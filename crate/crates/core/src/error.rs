use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable set is empty")]
    EmptyVariableSet,

    #[error("variable sets overlap on `{0}`")]
    OverlappingSets(String),

    #[error("duplicate axis name `{0}`")]
    DuplicateAxis(String),

    #[error("invalid alphabet `{name}`: {reason}")]
    InvalidAlphabet { name: String, reason: String },

    #[error("mass has {got} entries, axes require {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("negative probability {value} at entry {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("distribution sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("{context}: row {row} sums to {sum}, expected 1")]
    NotStochastic { context: String, row: usize, sum: f64 },

    #[error("axis `{0}` already present in base distribution")]
    AxisCollision(String),

    #[error("conditioning axis `{0}` missing from base distribution")]
    MissingAxis(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("value out of domain: {0}")]
    OutOfDomain(String),

    /// A modelling precondition does not hold (e.g. "not invertible").
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A resource guard refused the request (enumeration too large, etc).
    #[error("guard exceeded: {0}")]
    Guard(String),

    /// An information quantity or bound came out negative beyond tolerance.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Parse(_) => 1,
            Error::Internal(_) => 3,
            Error::Precondition(_) | Error::Guard(_) => 2,
            // Validation failures of user-supplied objects are input errors.
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
