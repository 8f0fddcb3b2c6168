//! Byte continuation prediction: a trainable order-k context model and a
//! host for external predictors speaking the stdio frame protocol.

mod error;
mod external;
mod model;
pub mod protocol;
mod serialize;

use serde::{Deserialize, Serialize};

pub use error::PredictError;
pub use external::{ExternalPredictor, DEFAULT_TIMEOUT};
pub use model::{
    predict, train, ByteModel, DecodeMode, SamplingPolicy, DEFAULT_ORDER, DEFAULT_SMOOTHING, MAX_ORDER,
};
pub use serialize::{load_model, model_id, save_model, MODEL_FORMAT_VERSION};

/// One predicted continuation and how it was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub source_id: String,
    #[serde(skip)]
    pub predicted_fragment: Vec<u8>,
    pub predictor_id: String,
    pub policy: Option<SamplingPolicy>,
}
