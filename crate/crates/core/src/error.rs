use thiserror::Error;

use crate::apps::image::PgmError;

pub type Result<T, E = HtcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HtcError {
    #[error("bit width {0} outside 1..=16")]
    InvalidBitWidth(u8),
    #[error("code {code} does not fit in {bits} bits")]
    CodeOutOfRange { code: u32, bits: u8 },
    #[error("signed value {value} outside the {bits}-bit two's complement range")]
    SignedOutOfRange { value: i32, bits: u8 },
    #[error("invalid LFSR configuration: {0}")]
    InvalidLfsr(String),
    #[error("polarity mismatch: expected {expected:?}, found {found:?}")]
    PolarityMismatch {
        expected: crate::Polarity,
        found: crate::Polarity,
    },
    #[error("bit width mismatch: {0} vs {1}")]
    WidthMismatch(u8, u8),
    #[error("bitstream length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("bitstream length {0} is not a power of two in 2..=65536")]
    InvalidStreamLength(usize),
    #[error("fan-in {0} must be a power of two in 2..=16")]
    InvalidFanIn(usize),
    #[error("expected {expected} operands, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("duplicate delay {0} in OR summation schedule")]
    DuplicateDelay(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("image is empty")]
    EmptyImage,
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    ImageSizeMismatch(usize, usize, usize, usize),
    #[error(transparent)]
    Pgm(#[from] PgmError),
}
