use serde::{Deserialize, Serialize};

use crate::autograd::{softmax_over_channels, FeatureMap};
use crate::error::{Result, VadError};

/// Channel index of the non-speech output.
pub const NON_SPEECH_CHANNEL: usize = 0;
/// Channel index of the speech output.
pub const SPEECH_CHANNEL: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VadLabel {
    NonSpeech,
    Speech,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameDecision {
    pub label: VadLabel,
    /// Two-way softmax probability of the speech channel.
    pub score: f64,
}

/// Speech probability for one frame's `(non_speech, speech)` outputs.
pub fn speech_score(non_speech: f64, speech: f64) -> f64 {
    softmax_over_channels(&[non_speech, speech])[SPEECH_CHANNEL]
}

/// Hard label is the larger channel (ties go to non-speech); the score is
/// threshold-sweepable and agrees with the hard label at 0.5.
pub fn vad_decision(scores: &FeatureMap) -> Result<Vec<FrameDecision>> {
    if scores.channels() != 2 {
        return Err(VadError::Config(format!(
            "VAD output must have 2 channels, got {}",
            scores.channels()
        )));
    }
    let non = scores.row(NON_SPEECH_CHANNEL);
    let sp = scores.row(SPEECH_CHANNEL);
    Ok(non
        .iter()
        .zip(sp)
        .map(|(&n, &s)| FrameDecision {
            label: if s > n { VadLabel::Speech } else { VadLabel::NonSpeech },
            score: speech_score(n, s),
        })
        .collect())
}

/// Per-frame speech scores only.
pub fn speech_scores(scores: &FeatureMap) -> Result<Vec<f64>> {
    Ok(vad_decision(scores)?.into_iter().map(|d| d.score).collect())
}
