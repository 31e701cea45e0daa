//! Waveform voice activity detection with adversarial noise-type training.
//!
//! The network is a fully convolutional encoder / framing / decoder stack
//! emitting one speech score per 10 ms, plus a discriminator that predicts
//! the noise type from the framing features and feeds a sign-flipped,
//! `alpha`-scaled gradient back into the shared layers during training.

pub mod autograd;
pub mod checkpoint;
pub mod corpus;
pub mod delay;
pub mod error;
pub mod evaluator;
pub mod model;
pub mod seed;
pub mod trainer;

pub use error::{Result, VadError};
pub use checkpoint::Checkpoint;
pub use corpus::{Condition, Snr, Utterance};
pub use delay::{DelayMode, DelaySpec};
pub use evaluator::{ConditionReport, RocCurve};
pub use model::{NetworkConfig, VadNetwork};
pub use trainer::{TrainReport, TrainSchedule, Trainer};
