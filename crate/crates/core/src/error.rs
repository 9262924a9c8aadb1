use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ambient dimension {n} exceeds the supported maximum {max}")]
    DimensionTooLarge { n: u32, max: u32 },

    #[error("point {word} does not fit in {n} bits")]
    PointOutOfRange { word: u64, n: u32 },

    #[error("duplicate point {0}")]
    DuplicatePoint(u32),

    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },

    #[error("enumerating {k}-flats of F_2^{n} exceeds the search cap")]
    EnumerationCap { n: u32, k: u32 },

    #[error("direction vectors are linearly dependent")]
    DependentVectors,

    #[error("field elements use different moduli ({0:#b} vs {1:#b})")]
    ModulusMismatch(u32, u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
