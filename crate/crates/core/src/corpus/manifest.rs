//! On-disk corpus: WAV files, label files and a CSV manifest
//! (`wav,labels,noise_type,snr`, paths relative to the manifest).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::labels::{read_label_file, write_label_file};
use crate::corpus::wav::{load_wav, save_wav};
use crate::corpus::{Snr, Utterance};
use crate::error::{Result, VadError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub wav: PathBuf,
    pub labels: PathBuf,
    pub noise_type: usize,
    pub snr: Snr,
}

fn csv_err(e: csv::Error) -> VadError {
    VadError::Format(format!("manifest: {e}"))
}

/// Writes `<dir>/<name>/NNNNN.{wav,lab}` and the manifest `<dir>/<name>.csv`.
pub fn write_corpus(dir: &Path, name: &str, utterances: &[Utterance]) -> Result<PathBuf> {
    let sub = dir.join(name);
    std::fs::create_dir_all(&sub)?;
    let manifest_path = dir.join(format!("{name}.csv"));
    let mut writer = csv::Writer::from_path(&manifest_path).map_err(csv_err)?;
    if utterances.is_empty() {
        writer
            .write_record(["wav", "labels", "noise_type", "snr"])
            .map_err(csv_err)?;
    }
    for (i, u) in utterances.iter().enumerate() {
        let wav = PathBuf::from(name).join(format!("{i:05}.wav"));
        let labels = PathBuf::from(name).join(format!("{i:05}.lab"));
        save_wav(&dir.join(&wav), &u.samples, u.fs)?;
        write_label_file(&dir.join(&labels), &u.vad_labels, u.noise_type)?;
        writer
            .serialize(ManifestEntry {
                wav,
                labels,
                noise_type: u.noise_type,
                snr: u.snr,
            })
            .map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(manifest_path)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    reader.deserialize().map(|r| r.map_err(csv_err)).collect()
}

/// Loads every utterance listed in a manifest.
pub fn load_corpus(manifest: &Path) -> Result<Vec<Utterance>> {
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    read_manifest(manifest)?
        .into_iter()
        .map(|entry| {
            let audio = load_wav(&base.join(&entry.wav))?;
            let (vad, noise) = read_label_file(&base.join(&entry.labels))?;
            if noise.iter().any(|&n| n != entry.noise_type) {
                return Err(VadError::Data(format!(
                    "{}: noise labels disagree with manifest noise type {}",
                    entry.labels.display(),
                    entry.noise_type
                )));
            }
            Utterance::new(audio.samples, audio.fs, vad, entry.noise_type, entry.snr)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let utts = vec![
            Utterance::new(vec![0.25; 800], 8000, vec![1; 10], 0, Snr::Clean).unwrap(),
            Utterance::new(vec![-0.5; 1600], 8000, vec![0; 20], 3, Snr::Db(-5.0)).unwrap(),
        ];
        let manifest = write_corpus(dir.path(), "train", &utts).unwrap();
        let entries = read_manifest(&manifest).unwrap();
        assert_eq!(entries[1].snr, Snr::Db(-5.0));
        assert_eq!(load_corpus(&manifest).unwrap(), utts);
    }

    #[test]
    fn empty_corpus_has_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_corpus(dir.path(), "empty", &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&manifest).unwrap(), "wav,labels,noise_type,snr\n");
        assert!(load_corpus(&manifest).unwrap().is_empty());
    }
}
