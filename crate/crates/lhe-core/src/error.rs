use thiserror::Error;

/// Errors produced by the computational operations of this crate.
///
/// PGM codec failures have their own type, [`crate::pgm::PgmError`].
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("image dimensions must be at least 1x1")]
    EmptyImage,

    #[error("pixel value {value} outside [0, {max}]")]
    PixelOutOfRange { value: u16, max: u16 },

    #[error("pixel buffer holds {got} values, expected {expected}")]
    PixelCountMismatch { got: usize, expected: usize },

    #[error("dimension mismatch: {0}x{1} vs {2}x{3} (width x height)")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("gray-level count mismatch: {0} vs {1}")]
    LevelsMismatch(u32, u32),

    #[error("window half-width must be at least 1")]
    WindowTooSmall,

    #[error("window side {side} exceeds image extent {width}x{height}")]
    WindowTooLarge {
        side: usize,
        width: usize,
        height: usize,
    },

    #[error("coordinates ({m}, {n}) outside image of {height} rows x {width} cols")]
    OutOfBounds {
        m: usize,
        n: usize,
        width: usize,
        height: usize,
    },

    #[error("non-finite value at ({m}, {n})")]
    NonFinite { m: usize, n: usize },

    #[error("invalid bounds field: {0}")]
    InvalidBounds(String),

    #[error("invalid target histogram: {0}")]
    InvalidTarget(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
