use thiserror::Error;

use crate::bmp::BmpError;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("empty input")]
    EmptyInput,
    #[error("zero-norm histogram")]
    ZeroVector,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("image sizes differ: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("window {window} must be odd and fit a {width}x{height} image")]
    WindowTooLarge {
        window: usize,
        width: usize,
        height: usize,
    },
    #[error("no window center falls inside the mask")]
    EmptyMask,
    #[error("predicted fragment has {actual} bytes, real fragment {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("reconstructed image does not parse: {0}")]
    ReconstructionUnparseable(BmpError),
    #[error(transparent)]
    Bmp(#[from] BmpError),
}
