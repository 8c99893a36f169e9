use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("domain mismatch: expected {expected}, found {found}")]
    Domain {
        expected: &'static str,
        found: &'static str,
    },

    #[error("basis mismatch: {0}")]
    Basis(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("accumulator overflow risk: inner dimension {inner} exceeds {limit}")]
    OverflowRisk { inner: usize, limit: usize },

    #[error("level mismatch: {0} vs {1}")]
    Level(usize, usize),

    #[error("scale mismatch: {0} vs {1}")]
    Scale(f64, f64),

    #[error("level budget exhausted")]
    LevelExhausted,

    #[error("missing key: {0}")]
    MissingKey(String),

    #[error("batch error: {0}")]
    Batch(String),

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("too many values: {given} > {slots} slots")]
    TooManyValues { given: usize, slots: usize },

    #[error("scale overflow: encoded coefficients exceed the modulus")]
    ScaleOverflow,

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
