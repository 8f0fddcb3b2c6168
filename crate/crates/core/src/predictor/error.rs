use thiserror::Error;

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("training corpus contains no bytes")]
    EmptyCorpus,
    #[error("context order {0} not supported (maximum {max})", max = super::MAX_ORDER)]
    InvalidOrder(usize),
    #[error("smoothing constant must be positive and finite, got {0}")]
    InvalidSmoothing(f64),
    #[error("invalid sampling policy: {0}")]
    InvalidPolicy(String),
    #[error("requested continuation length must be at least 1")]
    ZeroLength,
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("model format version {found}, this build reads {expected}")]
    VersionMismatch { found: u8, expected: u8 },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("predictor did not answer within {0:?}")]
    Timeout(std::time::Duration),
    #[error("predictor returned {got} bytes, {expected} requested")]
    ShortResponse { expected: usize, got: usize },
    #[error("predictor process failed: {0}")]
    PredictorCrashed(String),
    #[error("predictor connection already closed")]
    Closed,
}
