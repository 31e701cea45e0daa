//! Deterministic inputs shared by the benchmarks.

use wavad_core::corpus::{generate_corpus, SyntheticCorpusSpec};
use wavad_core::{Utterance, VadNetwork};

/// A reproducible pseudo-random signal in `[-1, 1]`.
pub fn signal(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

/// Scores and labels for AUC timing; labels alternate so both classes exist.
pub fn scored_frames(n: usize) -> (Vec<f64>, Vec<u8>) {
    let noise = signal(n, 7);
    let labels: Vec<u8> = (0..n).map(|i| (i % 3 != 0) as u8).collect();
    let scores = labels.iter().zip(&noise).map(|(&l, &e)| f64::from(l) * 0.3 + e).collect();
    (scores, labels)
}

/// `files` training utterances from the default synthetic recipe.
pub fn train_pool(files: usize) -> Vec<Utterance> {
    generate_corpus(&SyntheticCorpusSpec::train(files, 5)).expect("synthetic corpus")
}

/// One second of input beyond the network's minimum length.
pub fn waveform_for(net: &VadNetwork) -> Vec<f64> {
    signal(net.min_input_len() + net.config().fs as usize, 3)
}
