use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, VadError};

/// Mixing condition of an utterance: a finite SNR in dB, or no noise at all.
#[derive(Debug, Clone, Copy)]
pub enum Snr {
    Clean,
    Db(f64),
}

impl Snr {
    pub fn db(&self) -> Option<f64> {
        match self {
            Snr::Clean => None,
            Snr::Db(v) => Some(*v),
        }
    }

    /// Column order of the per-condition report: clean first, then
    /// decreasing SNR.
    fn rank(&self) -> f64 {
        match self {
            Snr::Clean => f64::INFINITY,
            Snr::Db(v) => *v,
        }
    }
}

impl PartialEq for Snr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Snr {}

impl PartialOrd for Snr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Snr {
    fn cmp(&self, other: &Self) -> Ordering {
        other.rank().total_cmp(&self.rank())
    }
}

impl std::hash::Hash for Snr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rank().to_bits().hash(state);
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Clean => f.write_str("clean"),
            Snr::Db(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Snr {
    type Err = VadError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("clean") || t.eq_ignore_ascii_case("inf") {
            return Ok(Snr::Clean);
        }
        let t = t.trim_end_matches("dB").trim_end_matches("db").trim();
        t.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Snr::Db)
            .ok_or_else(|| VadError::Format(format!("bad SNR '{s}'")))
    }
}

impl Serialize for Snr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Snr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The SNR grid of the evaluation tables, in report column order.
pub fn test_snr_grid() -> Vec<Snr> {
    let mut v = vec![Snr::Clean];
    v.extend([20.0, 15.0, 10.0, 5.0, 0.0, -5.0].map(Snr::Db));
    v
}

/// Training SNR grid: clean plus 20, 15, 10 and 5 dB.
pub fn train_snr_grid() -> Vec<Snr> {
    let mut v = vec![Snr::Clean];
    v.extend([20.0, 15.0, 10.0, 5.0].map(Snr::Db));
    v
}

/// A `(noise_type, snr)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Condition {
    pub noise_type: usize,
    pub snr: Snr,
}

/// Waveform with per-10 ms speech labels and its mixing condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub samples: Vec<f64>,
    pub fs: u32,
    pub vad_labels: Vec<u8>,
    /// 0 is clean speech, `1..=N` the noise types.
    pub noise_type: usize,
    pub snr: Snr,
}

impl Utterance {
    pub fn new(samples: Vec<f64>, fs: u32, vad_labels: Vec<u8>, noise_type: usize, snr: Snr) -> Result<Self> {
        let u = Utterance {
            samples,
            fs,
            vad_labels,
            noise_type,
            snr,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fs == 0 || self.fs % 100 != 0 {
            return Err(VadError::Data(format!("fs={} is not a multiple of 100", self.fs)));
        }
        let frames = self.samples.len() / self.hop();
        if self.vad_labels.len() != frames {
            return Err(VadError::Data(format!(
                "{} labels for {} samples ({} frames)",
                self.vad_labels.len(),
                self.samples.len(),
                frames
            )));
        }
        if self.vad_labels.iter().any(|&l| l > 1) {
            return Err(VadError::Data("VAD labels must be 0 or 1".into()));
        }
        if self.samples.iter().any(|s| !s.is_finite()) {
            return Err(VadError::Data("non-finite sample".into()));
        }
        if matches!(self.snr, Snr::Clean) && self.noise_type != 0 {
            return Err(VadError::Data("clean utterances carry noise type 0".into()));
        }
        Ok(())
    }

    /// Samples per 10 ms frame.
    pub fn hop(&self) -> usize {
        (self.fs / 100) as usize
    }

    pub fn frames(&self) -> usize {
        self.vad_labels.len()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.fs)
    }

    pub fn condition(&self) -> Condition {
        Condition {
            noise_type: self.noise_type,
            snr: self.snr,
        }
    }

    /// Noise-type label for every frame; constant over the utterance.
    pub fn noise_labels(&self) -> Vec<usize> {
        vec![self.noise_type; self.frames()]
    }

    pub fn speech_frames(&self) -> usize {
        self.vad_labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn speech_fraction(&self) -> f64 {
        if self.frames() == 0 {
            0.0
        } else {
            self.speech_frames() as f64 / self.frames() as f64
        }
    }
}
