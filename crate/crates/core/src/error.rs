//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SsdError>;

#[derive(Debug, Error)]
pub enum SsdError {
    /// A QR factorization met a numerically zero diagonal entry.
    #[error("rank-deficient input: |R[{index},{index}]| = {value:.3e} below threshold {threshold:.3e}")]
    RankDeficient {
        index: usize,
        value: f64,
        threshold: f64,
    },

    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The objective (or a derivative of it) evaluated to NaN or infinity.
    #[error("objective produced a non-finite value")]
    NonFinite,

    /// An operation that needs at least one element received none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// An optimizer or experiment configuration is internally inconsistent.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
