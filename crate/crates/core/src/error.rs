use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Majorana index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("support indices must be strictly increasing: {0:?}")]
    UnsortedSupport(Vec<usize>),

    #[error("mode-count mismatch: {left} vs {right} Majoranas")]
    ModeMismatch { left: usize, right: usize },

    #[error("number of Majoranas must be a positive even integer <= 64, got {0}")]
    InvalidModeCount(usize),

    #[error("dense limit exceeded: {qubits} qubits > cap {cap}")]
    SizeCap { qubits: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid degree q = {q}: {reason}")]
    InvalidDegree { q: usize, reason: String },

    #[error("sparsity p = {0} outside (0, 1]")]
    InvalidSparsity(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid covariance matrix: {0}")]
    InvalidCovariance(String),

    #[error("{method} did not converge after {iterations} iterations (best estimate {estimate}, residual {residual:e})")]
    NotConverged {
        method: &'static str,
        iterations: usize,
        estimate: f64,
        residual: f64,
    },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("config error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
