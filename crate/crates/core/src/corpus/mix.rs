use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Snr, Utterance};
use crate::error::{Result, VadError};

/// Which part of the speech signal defines its power for SNR purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrReference {
    /// Mean power over frames labeled as speech.
    #[default]
    ActiveSpeech,
    WholeFile,
}

/// A mixed utterance together with its clean and scaled-noise components.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub utterance: Utterance,
    pub speech: Vec<f64>,
    pub noise: Vec<f64>,
    pub gain: f64,
}

fn mean_power(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
    }
}

/// Reference speech power under `reference`.
pub fn speech_power(samples: &[f64], labels: &[u8], hop: usize, reference: SnrReference) -> f64 {
    match reference {
        SnrReference::WholeFile => mean_power(samples),
        SnrReference::ActiveSpeech => {
            let mut sum = 0.0;
            let mut n = 0usize;
            for (f, _) in labels.iter().enumerate().filter(|(_, &l)| l == 1) {
                let frame = &samples[f * hop..(f + 1) * hop];
                sum += frame.iter().map(|v| v * v).sum::<f64>();
                n += hop;
            }
            if n == 0 {
                0.0
            } else {
                sum / n as f64
            }
        }
    }
}

/// Gain applied to noise of power `noise_power` to reach `snr_db` against `speech_power`.
pub fn snr_gain(speech_power: f64, noise_power: f64, snr_db: f64) -> f64 {
    (speech_power / (noise_power * 10f64.powf(snr_db / 10.0))).sqrt()
}

/// SNR in dB recomputed from separated speech and (already scaled) noise.
pub fn measured_snr_db(speech: &[f64], noise: &[f64], labels: &[u8], hop: usize, reference: SnrReference) -> f64 {
    10.0 * (speech_power(speech, labels, hop, reference) / mean_power(noise)).log10()
}

/// Takes `len` samples of `noise` from a random offset, wrapping around when
/// the noise is shorter than `len`.
pub fn fit_noise<R: Rng + ?Sized>(noise: &[f64], len: usize, rng: &mut R) -> Result<Vec<f64>> {
    if noise.is_empty() {
        return Err(VadError::Data("empty noise signal".into()));
    }
    if noise.len() >= len {
        let offset = rng.gen_range(0..=noise.len() - len);
        Ok(noise[offset..offset + len].to_vec())
    } else {
        let offset = rng.gen_range(0..noise.len());
        Ok((0..len).map(|i| noise[(offset + i) % noise.len()]).collect())
    }
}

/// Adds `noise` to `speech` at the requested SNR.
///
/// `Snr::Clean` returns the speech unchanged with gain 0 and noise type 0.
pub fn mix_at_snr<R: Rng + ?Sized>(
    speech: &Utterance,
    noise: &[f64],
    noise_type: usize,
    snr: Snr,
    reference: SnrReference,
    rng: &mut R,
) -> Result<Mixture> {
    let n = speech.samples.len();
    let snr_db = match snr {
        Snr::Clean => {
            let utterance = Utterance::new(speech.samples.clone(), speech.fs, speech.vad_labels.clone(), 0, Snr::Clean)?;
            return Ok(Mixture {
                utterance,
                speech: speech.samples.clone(),
                noise: vec![0.0; n],
                gain: 0.0,
            });
        }
        Snr::Db(v) => v,
    };
    if noise_type == 0 {
        return Err(VadError::Data("noisy mixtures need a noise type >= 1".into()));
    }
    let p_speech = speech_power(&speech.samples, &speech.vad_labels, speech.hop(), reference);
    if !(p_speech > 0.0) {
        return Err(VadError::UndefinedSnr("speech reference region has zero power".into()));
    }
    let fitted = fit_noise(noise, n, rng)?;
    let p_noise = mean_power(&fitted);
    if !(p_noise > 0.0) {
        return Err(VadError::UndefinedSnr("noise segment has zero power".into()));
    }
    let gain = snr_gain(p_speech, p_noise, snr_db);
    let scaled: Vec<f64> = fitted.iter().map(|v| gain * v).collect();
    let mixed: Vec<f64> = speech.samples.iter().zip(&scaled).map(|(s, v)| s + v).collect();
    Ok(Mixture {
        utterance: Utterance::new(mixed, speech.fs, speech.vad_labels.clone(), noise_type, snr)?,
        speech: speech.samples.clone(),
        noise: scaled,
        gain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_speech() -> Utterance {
        // Alternating ±1 in speech frames only: active power exactly 1.
        let mut samples = vec![0.0; 800];
        let labels = vec![0, 1, 1, 1, 1, 1, 1, 1, 1, 0];
        for (i, s) in samples.iter_mut().enumerate().take(720).skip(80) {
            *s = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        Utterance::new(samples, 8000, labels, 0, Snr::Clean).unwrap()
    }

    #[test]
    fn gain_examples() {
        assert_eq!(snr_gain(1.0, 1.0, 0.0), 1.0);
        let g = snr_gain(1.0, 4.0, -5.0);
        assert!((g - (10f64.powf(0.5) / 4.0).sqrt()).abs() < 1e-15);
        assert!((g - 0.889).abs() < 1e-3);
    }

    #[test]
    fn unit_powers_at_zero_db_give_unit_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let noise: Vec<f64> = (0..1600).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let m = mix_at_snr(&unit_speech(), &noise, 1, Snr::Db(0.0), SnrReference::ActiveSpeech, &mut rng).unwrap();
        assert!((m.gain - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clean_is_passthrough() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let speech = unit_speech();
        let m = mix_at_snr(&speech, &[0.5; 10], 3, Snr::Clean, SnrReference::ActiveSpeech, &mut rng).unwrap();
        assert_eq!(m.gain, 0.0);
        assert_eq!(m.utterance.samples, speech.samples);
        assert_eq!(m.utterance.noise_type, 0);
    }

    #[test]
    fn short_noise_is_tiled_and_snr_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise: Vec<f64> = (0..97).map(|i| ((i * 31 % 17) as f64 - 8.0) / 8.0).collect();
        for reference in [SnrReference::ActiveSpeech, SnrReference::WholeFile] {
            let m = mix_at_snr(&unit_speech(), &noise, 2, Snr::Db(7.5), reference, &mut rng).unwrap();
            let got = measured_snr_db(&m.speech, &m.noise, &m.utterance.vad_labels, 80, reference);
            assert!((got - 7.5).abs() < 1e-9);
        }
    }

    #[test]
    fn silent_speech_is_undefined() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let silent = Utterance::new(vec![0.0; 800], 8000, vec![1; 10], 0, Snr::Clean).unwrap();
        let err = mix_at_snr(&silent, &[1.0; 900], 1, Snr::Db(5.0), SnrReference::ActiveSpeech, &mut rng);
        assert!(matches!(err, Err(VadError::UndefinedSnr(_))));
        let no_speech = Utterance::new(vec![0.3; 800], 8000, vec![0; 10], 0, Snr::Clean).unwrap();
        let err = mix_at_snr(&no_speech, &[1.0; 900], 1, Snr::Db(5.0), SnrReference::ActiveSpeech, &mut rng);
        assert!(matches!(err, Err(VadError::UndefinedSnr(_))));
    }
}
