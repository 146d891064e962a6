//! Error taxonomy shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants map to distinct failure stages: `Argument` for malformed requests,
/// `Validation` for data that fails structural checks, `Measurement` for a
/// predictiveness value that is undefined on the given sample, `Estimation`
/// for downstream procedures that could not produce a usable fit, and
/// `UnsupportedInference` for summaries whose point estimate exists but whose
/// influence-based inference is refused.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("measurement error: {0}")]
    Measurement(String),

    #[error("estimation failure: {0}")]
    Estimation(String),

    #[error("unsupported inference: {0}")]
    UnsupportedInference(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
