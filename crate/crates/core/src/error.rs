use thiserror::Error;

/// Errors raised by the filters and their configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("partition {index} is invalid: {reason}")]
    InvalidPartition { index: usize, reason: String },
    #[error("extent matrix is not symmetric positive definite")]
    DegenerateExtent,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
