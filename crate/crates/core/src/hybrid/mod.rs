//! Hybrid models: optional classical adapter, two-qubit quantum feature
//! extractor, and a small classical head, with their joint training loop.

mod model;
pub(crate) mod predictor;
pub(crate) mod train;

pub use model::{
    quantum_observables, Activation, AdapterParams, Architecture, CircuitKind, HeadParams,
    HybridModel, Variant, N_QUANTUM_FEATURES,
};
pub use predictor::{encoding_scale, HybridPredictor};
pub use train::{loss_and_gradients, train, Gradients, TrainConfig, TrainScope, TrainingTrace};

use thiserror::Error;

use crate::qsim::QsimError;

#[derive(Debug, Error)]
pub enum HybridError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("predict called before fit")]
    NotFitted,
    #[error(transparent)]
    Qsim(#[from] QsimError),
}
