//! Learned determinantal subset-selection models for the two network
//! scenarios: kernel construction from quality/similarity closed forms,
//! conditional log-likelihood with analytic gradients, gradient-ascent
//! training, and inference routing into the samplers and MAP solver.

mod adhoc;
mod dronecell;
mod infer;
mod likelihood;
mod params;
mod train;

pub use adhoc::{adhoc_features, quality_adhoc, similarity_adhoc, similarity_adhoc_with, DiagMode};
pub use dronecell::{
    quality_dronecell, similarity_dronecell, similarity_dronecell_with, DiagRule,
};
pub use infer::{infer, InferMode};
pub use likelihood::{
    build_model_kernel, grad_log_likelihood, log_likelihood, LogLik, TrainingSample, TrainingSet,
};
pub use params::{ModelFamily, ModelParams, TrainMeta};
pub use train::{train, train_with_trace, TrainConfig};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("invalid training data: {0}")]
    Data(String),
    #[error("training sample {index} has nonpositive subset determinant")]
    DegenerateSample { index: usize },
    #[error("initialization is degenerate: log-likelihood is -inf at the starting point")]
    DegenerateInit,
    #[error(transparent)]
    Dpp(#[from] dpp_core::DppError),
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ModelError>;
