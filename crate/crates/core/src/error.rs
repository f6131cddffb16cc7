use thiserror::Error;

use crate::ring::RingDiagnostics;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid ring: {}", .0.summary())]
    InvalidRing(RingDiagnostics),

    #[error("ring schema: {0}")]
    Schema(String),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    /// A differential term landed outside the slice it must map into.
    #[error("grading inconsistency: {0}")]
    Grading(String),

    #[error(
        "differential does not square to zero: block out of (degree {degree}, weight {weight})"
    )]
    NonZeroSquare { degree: u32, weight: u32 },

    #[error("under-determined: {needed} samples needed, {available} available")]
    UnderDetermined { needed: usize, available: usize },

    #[error("complex has {monomials} monomials, above the cap of {cap}")]
    TooLarge { monomials: u128, cap: u128 },

    #[error("claim failed: {0}")]
    ClaimFailed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
