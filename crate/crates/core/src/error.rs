use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("size mismatch: expected K = {expected}, found K = {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("vector of length {len} is not a coefficient vector (need an even, nonzero length)")]
    BadLength { len: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value produced at step {step}")]
    NonFinite { step: usize },

    #[error("final time {t_end} is not an integer multiple of the stepsize {h}")]
    Incommensurate { t_end: f64, h: f64 },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
}

pub type Result<T> = std::result::Result<T, Error>;
