//! Synthetic speech surrogate with labels known by construction.
//!
//! Voiced segments are harmonic series with a drifting pitch, two moving
//! formant resonances and a 2 to 8 Hz syllabic envelope. Files start and end in
//! silence and may contain interior pauses.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::corpus::{Snr, Utterance};
use crate::error::{Result, VadError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechStructure {
    /// Target fraction of frames labeled speech; 0 yields an all-silence file.
    pub speech_fraction: f64,
    /// Upper bound on interior pauses.
    pub max_pauses: usize,
    /// RMS over speech frames.
    pub active_rms: f64,
}

impl Default for SpeechStructure {
    fn default() -> Self {
        SpeechStructure {
            speech_fraction: 0.75,
            max_pauses: 2,
            active_rms: 0.1,
        }
    }
}

const MIN_SEGMENT_FRAMES: usize = 10;

/// Splits `total` into parts proportional to `weights`; the remainder goes to `rest_to`.
fn apportion(total: usize, weights: &[f64], rest_to: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let mut parts: Vec<usize> = weights.iter().map(|w| (total as f64 * w / sum).floor() as usize).collect();
    let used: usize = parts.iter().sum();
    parts[rest_to] += total - used;
    parts
}

/// Frame labels: leading silence, speech segments separated by pauses, trailing silence.
pub fn speech_layout<R: Rng + ?Sized>(rng: &mut R, frames: usize, structure: &SpeechStructure) -> Vec<u8> {
    let speech = ((structure.speech_fraction.clamp(0.0, 1.0)) * frames as f64).round() as usize;
    if speech == 0 {
        return vec![0; frames];
    }
    let silence = frames - speech;
    let mut segments = 1 + rng.gen_range(0..=structure.max_pauses);
    while segments > 1 && speech < MIN_SEGMENT_FRAMES * segments {
        segments -= 1;
    }
    // Silence weights: [lead, pauses..., trail].
    let mut sil_w = vec![rng.gen_range(1.0..2.0)];
    sil_w.extend((1..segments).map(|_| rng.gen_range(0.2..0.8)));
    sil_w.push(rng.gen_range(1.0..2.0));
    let sil = apportion(silence, &sil_w, 0);
    let sp_w: Vec<f64> = (0..segments).map(|_| rng.gen_range(0.5..1.5)).collect();
    let sp = apportion(speech, &sp_w, segments - 1);

    let mut labels = Vec::with_capacity(frames);
    labels.extend(std::iter::repeat(0u8).take(sil[0]));
    for (i, &len) in sp.iter().enumerate() {
        labels.extend(std::iter::repeat(1u8).take(len));
        labels.extend(std::iter::repeat(0u8).take(sil[i + 1]));
    }
    labels
}

fn render_segment<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64], fs: f64, f0_base: f64) {
    let n = out.len();
    let syllable_rate = rng.gen_range(2.0..8.0);
    let env_phase = 0.0;
    let f0_rate = rng.gen_range(0.3..1.5);
    let f0_phase = rng.gen_range(0.0..2.0 * PI);
    let f1c = rng.gen_range(350.0..850.0);
    let f2c = rng.gen_range(1000.0..2300.0);
    let ph1 = rng.gen_range(0.0..2.0 * PI);
    let ph2 = rng.gen_range(0.0..2.0 * PI);
    let max_freq = (0.45 * fs).min(3600.0);
    let ramp = (0.015 * fs) as usize;
    let block = (fs / 100.0) as usize;

    let mut phase = rng.gen_range(0.0..2.0 * PI);
    let mut weights: Vec<f64> = Vec::new();
    for start in (0..n).step_by(block.max(1)) {
        let t_block = start as f64 / fs;
        let f0 = f0_base * (1.0 + 0.12 * (2.0 * PI * f0_rate * t_block + f0_phase).sin());
        let f1 = f1c + 150.0 * (2.0 * PI * syllable_rate * t_block + ph1).sin();
        let f2 = f2c + 300.0 * (2.0 * PI * 0.7 * syllable_rate * t_block + ph2).sin();
        let harmonics = (max_freq / f0).floor().max(1.0) as usize;
        weights.clear();
        weights.extend((1..=harmonics).map(|h| {
            let f = h as f64 * f0;
            let res = 1.0 + 3.0 * (-((f - f1) / 180.0).powi(2)).exp() + 2.0 * (-((f - f2) / 260.0).powi(2)).exp();
            res / (h as f64).powf(0.8)
        }));
        let dphi = 2.0 * PI * f0 / fs;
        for i in start..(start + block).min(n) {
            let t = i as f64 / fs;
            let env = 0.55 - 0.45 * (2.0 * PI * syllable_rate * t + env_phase).cos();
            let edge = if i < ramp {
                i as f64 / ramp as f64
            } else if n - i <= ramp {
                (n - i) as f64 / ramp as f64
            } else {
                1.0
            };
            // sin(hφ) by repeated rotation of (cos φ, sin φ).
            let (s1, c1) = phase.sin_cos();
            let (mut s, mut c) = (s1, c1);
            let mut voiced = 0.0;
            for &w in &weights {
                voiced += w * s;
                let ns = s * c1 + c * s1;
                c = c * c1 - s * s1;
                s = ns;
            }
            let breath: f64 = StandardNormal.sample(rng);
            out[i] = env * edge * (voiced + 0.05 * breath);
            phase = (phase + dphi) % (2.0 * PI);
        }
    }
}

/// Deterministic synthetic utterance of `duration_s` seconds (frame-aligned).
pub fn synth_utterance(seed: u64, duration_s: f64, fs: u32, structure: &SpeechStructure) -> Result<Utterance> {
    if !(duration_s >= 0.5) {
        return Err(VadError::Config(format!("synthetic utterances need >= 0.5 s, got {duration_s}")));
    }
    if fs == 0 || fs % 100 != 0 {
        return Err(VadError::Config(format!("fs={fs} must be a multiple of 100")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hop = (fs / 100) as usize;
    let frames = (duration_s * 100.0).floor() as usize;
    let labels = speech_layout(&mut rng, frames, structure);
    let mut samples = vec![0.0; frames * hop];
    let f0_base = rng.gen_range(90.0..230.0);

    let mut f = 0;
    while f < frames {
        if labels[f] == 0 {
            f += 1;
            continue;
        }
        let start = f;
        while f < frames && labels[f] == 1 {
            f += 1;
        }
        render_segment(&mut rng, &mut samples[start * hop..f * hop], f64::from(fs), f0_base);
    }

    let speech_frames = labels.iter().filter(|&&l| l == 1).count();
    if speech_frames > 0 {
        let power: f64 = samples.iter().map(|v| v * v).sum::<f64>() / (speech_frames * hop) as f64;
        let scale = structure.active_rms / power.sqrt();
        samples.iter_mut().for_each(|v| *v *= scale);
    }
    Utterance::new(samples, fs, labels, 0, Snr::Clean)
}
