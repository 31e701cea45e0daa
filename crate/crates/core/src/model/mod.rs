//! The four-block detector: encoder, framing, decoder and the
//! gradient-reversed noise-type discriminator.

pub mod align;
pub mod config;
pub mod decision;
pub mod network;

pub use align::frame_label_alignment;
pub use config::{NetworkConfig, DEFAULT_DB_KERNELS, DEFAULT_DN_KERNELS, DEFAULT_EB_KERNELS};
pub use decision::{speech_score, speech_scores, vad_decision, FrameDecision, VadLabel, NON_SPEECH_CHANNEL, SPEECH_CHANNEL};
pub use network::{vad_loss, BackwardSpec, ForwardTrace, FrameCounts, Losses, NetworkGrads, VadNetwork};
