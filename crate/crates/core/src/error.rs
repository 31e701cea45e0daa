use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, VadError>;

#[derive(Debug, Error)]
pub enum VadError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("insufficient context: need at least {needed} {unit}, got {got}")]
    InsufficientContext {
        needed: usize,
        got: usize,
        unit: &'static str,
    },

    #[error("label alignment error: {0}")]
    Alignment(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("undefined SNR: {0}")]
    UndefinedSnr(String),

    #[error("undefined AUC: {0}")]
    UndefinedAuc(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("non-finite loss at optimizer step {step} (diagnostic checkpoint: {checkpoint:?})")]
    NonFiniteLoss {
        step: usize,
        checkpoint: Option<PathBuf>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl VadError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        VadError::Config(msg.into())
    }
}
