//! Data layer: WAV and label I/O, SNR mixing, synthetic speech and noise,
//! and concatenation batching.

pub mod batch;
pub mod generate;
pub mod labels;
pub mod manifest;
pub mod mix;
pub mod noise;
pub mod synth;
pub mod utterance;
pub mod wav;

pub use batch::{concat_batch, concatenate, conditions};
pub use generate::{generate_corpus, SyntheticCorpusSpec};
pub use labels::{labels_from_word_alignments, parse_word_alignments};
pub use manifest::{load_corpus, read_manifest, write_corpus, ManifestEntry};
pub use mix::{measured_snr_db, mix_at_snr, snr_gain, Mixture, SnrReference};
pub use noise::{synth_noise, NoiseBank, NoiseKind, Split};
pub use synth::{synth_utterance, SpeechStructure};
pub use utterance::{test_snr_grid, train_snr_grid, Condition, Snr, Utterance};
pub use wav::{load_wav, save_wav, WavAudio};
