use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::mix::{mix_at_snr, SnrReference};
use crate::corpus::noise::{NoiseBank, NoiseKind, Split};
use crate::corpus::synth::{synth_utterance, SpeechStructure};
use crate::corpus::{Snr, Utterance};
use crate::error::{Result, VadError};
use crate::seed::derive_seed;

/// Recipe for a synthetic, fully labeled noisy-speech corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpusSpec {
    pub fs: u32,
    pub files: usize,
    pub min_duration_s: f64,
    pub max_duration_s: f64,
    pub structure: SpeechStructure,
    /// Noise kinds; kind `i` gets noise-type label `i + 1`.
    pub noise_kinds: Vec<NoiseKind>,
    pub snrs: Vec<Snr>,
    pub split: Split,
    pub seed: u64,
    pub reference: SnrReference,
}

impl SyntheticCorpusSpec {
    pub fn train(files: usize, seed: u64) -> Self {
        SyntheticCorpusSpec {
            fs: 8000,
            files,
            min_duration_s: 0.8,
            max_duration_s: 2.0,
            structure: SpeechStructure::default(),
            noise_kinds: NoiseKind::ALL[..4].to_vec(),
            snrs: crate::corpus::train_snr_grid(),
            split: Split::Train,
            seed,
            reference: SnrReference::ActiveSpeech,
        }
    }

    pub fn test(files: usize, seed: u64) -> Self {
        SyntheticCorpusSpec {
            snrs: crate::corpus::test_snr_grid(),
            split: Split::Test,
            ..Self::train(files, seed)
        }
    }

    /// `(kind index, snr)` cells; files are assigned to them round-robin.
    pub fn cells(&self) -> Vec<(usize, Snr)> {
        (0..self.noise_kinds.len())
            .flat_map(|k| self.snrs.iter().map(move |&s| (k, s)))
            .collect()
    }
}

/// Generates the corpus; each file depends only on `(seed, split, index)`.
pub fn generate_corpus(spec: &SyntheticCorpusSpec) -> Result<Vec<Utterance>> {
    if spec.files == 0 {
        return Ok(Vec::new());
    }
    let cells = spec.cells();
    if cells.is_empty() {
        return Err(VadError::Config("corpus needs at least one noise kind and one SNR".into()));
    }
    if !(spec.min_duration_s >= 0.5 && spec.max_duration_s >= spec.min_duration_s) {
        return Err(VadError::Config("durations must satisfy 0.5 <= min <= max".into()));
    }
    let bank = NoiseBank::new(spec.noise_kinds.clone(), spec.split, spec.seed, spec.fs);
    let split_tag = match spec.split {
        Split::Train => 1,
        Split::Test => 2,
    };
    (0..spec.files)
        .map(|i| {
            let file_seed = derive_seed(spec.seed, &[split_tag, i as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(file_seed);
            let duration = if spec.max_duration_s > spec.min_duration_s {
                rng.gen_range(spec.min_duration_s..spec.max_duration_s)
            } else {
                spec.min_duration_s
            };
            let clean = synth_utterance(rng.gen(), duration, spec.fs, &spec.structure)?;
            let (kind, snr) = cells[i % cells.len()];
            if snr == Snr::Clean || clean.speech_frames() == 0 {
                return Ok(clean);
            }
            let noise = bank.instance(kind, i, clean.samples.len() + spec.fs as usize)?;
            let mixture = mix_at_snr(&clean, &noise, bank.noise_type(kind), snr, spec.reference, &mut rng)?;
            Ok(mixture.utterance)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_robin_cells_and_determinism() {
        let spec = SyntheticCorpusSpec::test(28, 3);
        let a = generate_corpus(&spec).unwrap();
        assert_eq!(a.len(), 28);
        for (i, u) in a.iter().enumerate() {
            let (kind, snr) = spec.cells()[i % 28];
            assert_eq!(u.snr, snr);
            assert_eq!(u.noise_type, if snr == Snr::Clean { 0 } else { kind + 1 });
        }
        assert_eq!(a, generate_corpus(&spec).unwrap());
        assert!(generate_corpus(&SyntheticCorpusSpec::test(0, 3)).unwrap().is_empty());
    }

    #[test]
    fn train_and_test_differ() {
        let train = generate_corpus(&SyntheticCorpusSpec::train(3, 3)).unwrap();
        let test = generate_corpus(&SyntheticCorpusSpec::test(3, 3)).unwrap();
        assert_ne!(train[1].samples, test[1].samples);
    }
}
