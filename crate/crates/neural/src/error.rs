use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = NeuralError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error(transparent)]
    Core(#[from] tispell_core::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid model configuration: {0}")]
    Config(String),

    #[error("bad checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },

    #[error("non-finite value in {tensor} at step {step}")]
    NonFinite { tensor: String, step: usize },

    #[error("non-finite activation in {0}")]
    NonFiniteActivation(String),

    #[error("target sequence has no non-pad positions")]
    EmptyTarget,

    #[error("layer {layer} / head {head} out of range ({layers} layers, {heads} heads)")]
    AttentionIndex {
        layer: usize,
        head: usize,
        layers: usize,
        heads: usize,
    },

    #[error("no usable training examples")]
    NoExamples,
}

impl NeuralError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        NeuralError::Io {
            path: path.into(),
            source,
        }
    }
}
