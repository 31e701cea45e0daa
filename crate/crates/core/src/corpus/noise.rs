//! Synthetic noise types and the split-aware noise bank.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VadError};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    White,
    /// 1/f power spectrum (-3 dB per octave).
    Pink,
    /// Mains hum with harmonics over a faint hiss.
    Hum,
    /// Long-term speech-like spectrum, low-cut at 100 Hz, -6 dB/octave above 800 Hz.
    SpeechShaped,
    /// Pink noise gated by random bursts, a crowd-like non-stationary texture.
    Bursty,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 5] = [
        NoiseKind::White,
        NoiseKind::Pink,
        NoiseKind::Hum,
        NoiseKind::SpeechShaped,
        NoiseKind::Bursty,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::White => "white",
            NoiseKind::Pink => "pink",
            NoiseKind::Hum => "hum",
            NoiseKind::SpeechShaped => "speech_shaped",
            NoiseKind::Bursty => "bursty",
        }
    }

    fn tag(&self) -> u64 {
        Self::ALL.iter().position(|k| k == self).expect("listed") as u64
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = VadError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s || (s == "speech-shaped" && *k == NoiseKind::SpeechShaped))
            .ok_or_else(|| VadError::Config(format!("unknown noise kind '{s}'")))
    }
}

fn normalize(x: &mut [f64], power: f64) {
    let p = x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64;
    if p > 0.0 {
        let s = (power / p).sqrt();
        x.iter_mut().for_each(|v| *v *= s);
    }
}

/// Shapes white noise by an amplitude response `gain(freq_hz)` in the frequency domain.
fn spectral_shape<R: Rng + ?Sized>(rng: &mut R, n: usize, fs: f64, gain: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = (0..n).map(|_| Complex::new(StandardNormal.sample(rng), 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let bin = k.min(n - k);
        let f = bin as f64 * fs / n as f64;
        *c *= if bin == 0 { 0.0 } else { gain(f) };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// `n` samples of `kind` at sampling rate `fs`.
///
/// White noise is drawn directly from N(0, power); every other kind is
/// normalized to exactly `power`.
pub fn synth_noise(kind: NoiseKind, seed: u64, n: usize, fs: u32, power: f64) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = f64::from(fs);
    let mut x = match kind {
        NoiseKind::White => {
            let dist = Normal::new(0.0, power.sqrt()).expect("finite power");
            return (0..n).map(|_| dist.sample(&mut rng)).collect();
        }
        NoiseKind::Pink => spectral_shape(&mut rng, n, fs, |f| 1.0 / f.sqrt()),
        NoiseKind::SpeechShaped => spectral_shape(&mut rng, n, fs, |f| {
            let low_cut = f / (f + 100.0);
            low_cut / (1.0 + (f / 800.0).powi(2)).sqrt()
        }),
        NoiseKind::Hum => {
            let mains = if rng.gen_bool(0.5) { 50.0 } else { 60.0 };
            let drift = rng.gen_range(-0.3..0.3);
            let top = (0.45 * fs).min(1200.0);
            let harmonics: Vec<(f64, f64)> = (1..)
                .map(|h| h as f64)
                .take_while(|h| h * mains < top)
                .map(|h| (h, rng.gen_range(0.0..2.0 * PI)))
                .collect();
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    let f = mains + drift * (2.0 * PI * 0.1 * t).sin();
                    let tone: f64 = harmonics.iter().map(|&(h, ph)| (2.0 * PI * h * f * t + ph).sin() / h).sum();
                    let hiss: f64 = StandardNormal.sample(&mut rng);
                    tone + 0.1 * hiss
                })
                .collect()
        }
        NoiseKind::Bursty => {
            let base = spectral_shape(&mut rng, n, fs, |f| 1.0 / f.sqrt());
            let mut env = vec![0.15; n];
            let mut i = 0usize;
            while i < n {
                i += (rng.gen_range(0.02..0.4) * fs) as usize;
                let len = (rng.gen_range(0.05..0.4) * fs) as usize;
                let amp = rng.gen_range(0.3..1.0);
                for (j, e) in env.iter_mut().skip(i).take(len).enumerate() {
                    let w = (PI * j as f64 / len as f64).sin();
                    *e += amp * w;
                }
                i += len;
            }
            base.iter().zip(&env).map(|(b, e)| b * e).collect()
        }
    };
    normalize(&mut x, power);
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn tag(&self) -> u64 {
        match self {
            Split::Train => 0x7472_6169_6e,
            Split::Test => 0x7465_7374,
        }
    }
}

impl FromStr for Split {
    type Err = VadError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(VadError::Config(format!("unknown split '{s}'"))),
        }
    }
}

/// Noise generators for one data split. Instances are seeded from
/// `(seed, split, kind, index)`, so train and test never share a recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseBank {
    pub kinds: Vec<NoiseKind>,
    pub split: Split,
    pub seed: u64,
    pub fs: u32,
}

impl NoiseBank {
    pub fn new(kinds: Vec<NoiseKind>, split: Split, seed: u64, fs: u32) -> Self {
        NoiseBank { kinds, split, seed, fs }
    }

    /// Noise-type label of kind `kind_index` (labels start at 1; 0 is clean).
    pub fn noise_type(&self, kind_index: usize) -> usize {
        kind_index + 1
    }

    /// Identifies a noise instance; equal fingerprints mean the same samples.
    pub fn fingerprint(&self, kind_index: usize, index: usize) -> u64 {
        derive_seed(self.seed, &[self.split.tag(), self.kinds[kind_index].tag(), index as u64])
    }

    pub fn instance(&self, kind_index: usize, index: usize, len: usize) -> Result<Vec<f64>> {
        let kind = *self
            .kinds
            .get(kind_index)
            .ok_or_else(|| VadError::Config(format!("noise kind index {kind_index} not in bank")))?;
        Ok(synth_noise(kind, self.fingerprint(kind_index, index), len, self.fs, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_variance_matches_power() {
        let x = synth_noise(NoiseKind::White, 9, 80_000, 8000, 0.25);
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
        assert!((var - 0.25).abs() < 0.25 * 0.02, "variance {var}");
    }

    #[test]
    fn deterministic_per_kind_and_seed() {
        for kind in NoiseKind::ALL {
            let a = synth_noise(kind, 4, 4000, 8000, 1.0);
            assert_eq!(a, synth_noise(kind, 4, 4000, 8000, 1.0));
            assert_ne!(a, synth_noise(kind, 5, 4000, 8000, 1.0));
            assert!(a.iter().all(|v| v.is_finite()));
            if kind != NoiseKind::White {
                let p = a.iter().map(|v| v * v).sum::<f64>() / a.len() as f64;
                assert!((p - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("pink".parse::<NoiseKind>().unwrap(), NoiseKind::Pink);
        assert_eq!("speech_shaped".parse::<NoiseKind>().unwrap(), NoiseKind::SpeechShaped);
        assert!(matches!("subway".parse::<NoiseKind>(), Err(VadError::Config(_))));
    }

    #[test]
    fn splits_are_disjoint() {
        let kinds = NoiseKind::ALL.to_vec();
        let train = NoiseBank::new(kinds.clone(), Split::Train, 1, 8000);
        let test = NoiseBank::new(kinds, Split::Test, 1, 8000);
        let mut seen = std::collections::HashSet::new();
        for k in 0..5 {
            for i in 0..200 {
                assert!(seen.insert(train.fingerprint(k, i)));
            }
        }
        for k in 0..5 {
            for i in 0..200 {
                assert!(!seen.contains(&test.fingerprint(k, i)));
            }
        }
        assert_ne!(train.instance(0, 0, 100).unwrap(), test.instance(0, 0, 100).unwrap());
        assert!(train.instance(7, 0, 10).is_err());
    }
}
