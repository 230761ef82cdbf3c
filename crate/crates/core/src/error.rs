use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {index} = {value} is outside the support [-1, 1]")]
    OutOfSupport { index: usize, value: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("duplicate parameter `{0}`")]
    DuplicateParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample rejected after {attempts} redraws for parameter `{name}`")]
    SamplingExhausted { name: String, attempts: usize },

    #[error("expected {expected} coordinates, got {got}")]
    FrameMismatch { expected: &'static str, got: &'static str },

    #[error("basis of {count} terms exceeds the cap of {cap}")]
    BasisTooLarge { count: u128, cap: usize },

    #[error("degree {degree} exceeds the cap of {cap}")]
    DegreeTooLarge { degree: usize, cap: usize },

    #[error("underdetermined fit: {rows} training rows for {terms} basis terms")]
    Underdetermined { rows: usize, terms: usize },

    #[error("at least 2 validation points are required, got {0}")]
    TooFewValidation(usize),

    #[error("model variance is zero, Sobol indices are undefined")]
    ZeroVariance,

    #[error("invalid cell parameters: {0}")]
    InvalidCell(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("simulation failed: {0}")]
    SimulationFailed(String),

    #[error("{failed} of {total} simulations failed (limit 5%)")]
    ExcessiveFailures { failed: usize, total: usize },

    #[error("every time point of `{0}` is excluded by the R² gate")]
    AllExcluded(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
