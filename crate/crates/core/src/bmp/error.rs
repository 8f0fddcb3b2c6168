use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BmpError {
    #[error("malformed BMP header: {0}")]
    MalformedHeader(String),
    #[error("unsupported BMP variant: {0}")]
    UnsupportedVariant(String),
    #[error("truncated BMP: need {needed} bytes, have {actual}")]
    Truncated { needed: usize, actual: usize },
    #[error("pixel buffer holds {actual} pixels, dimensions need {expected}")]
    PixelCount { expected: usize, actual: usize },
    #[error("offset {offset} outside file of {file_size} bytes")]
    OffsetOutOfRange { offset: usize, file_size: usize },
    #[error("image is {actual:?} (w, h, bytes), profile requires {expected:?}")]
    ProfileMismatch {
        expected: (usize, usize, usize),
        actual: (usize, usize, usize),
    },
}
