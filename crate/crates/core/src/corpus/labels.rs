use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, VadError};

/// Per-frame labels from word intervals `[start, end)` in samples.
///
/// A frame is speech when at least half of its samples fall inside a word.
/// Overlapping or touching intervals are merged first; intervals are clipped
/// to the file.
pub fn labels_from_word_alignments(intervals: &[(usize, usize)], n_samples: usize, fs: u32) -> Vec<u8> {
    let hop = (fs / 100) as usize;
    let frames = n_samples / hop;
    let mut sorted: Vec<(usize, usize)> = intervals
        .iter()
        .map(|&(s, e)| (s.min(n_samples), e.min(n_samples)))
        .filter(|(s, e)| e > s)
        .collect();
    sorted.sort_unstable();
    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(sorted.len());
    for (s, e) in sorted {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    let mut labels = vec![0u8; frames];
    for (f, label) in labels.iter_mut().enumerate() {
        let (fs0, fs1) = (f * hop, (f + 1) * hop);
        let covered: usize = merged
            .iter()
            .map(|&(s, e)| e.min(fs1).saturating_sub(s.max(fs0)))
            .sum();
        if 2 * covered >= hop {
            *label = 1;
        }
    }
    labels
}

/// Parses word alignment text (`<start> <end> <word>` per line, in samples).
pub fn parse_word_alignments(text: &str) -> Result<Vec<(usize, usize)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let mut it = line.split_whitespace();
            let mut num = || -> Result<usize> {
                it.next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| VadError::Format(format!("word alignment line {}: '{line}'", i + 1)))
            };
            let start = num()?;
            let end = num()?;
            if end < start {
                return Err(VadError::Format(format!("word alignment line {}: end before start", i + 1)));
            }
            Ok((start, end))
        })
        .collect()
}

/// Label file body: `<frame_index> <vad 0|1> <noise_type_id>` per line.
pub fn format_label_file(vad: &[u8], noise_type: usize) -> String {
    let mut out = String::with_capacity(vad.len() * 8);
    for (i, v) in vad.iter().enumerate() {
        writeln!(out, "{i} {v} {noise_type}").expect("write to string");
    }
    out
}

pub fn parse_label_file(text: &str) -> Result<(Vec<u8>, Vec<usize>)> {
    let mut vad = Vec::new();
    let mut noise = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || VadError::Format(format!("label line {}: '{line}'", i + 1));
        if fields.len() != 3 {
            return Err(bad());
        }
        let idx: usize = fields[0].parse().map_err(|_| bad())?;
        if idx != vad.len() {
            return Err(VadError::Format(format!("label line {}: frame index {idx} out of order", i + 1)));
        }
        let v: u8 = fields[1].parse().ok().filter(|v| *v <= 1).ok_or_else(bad)?;
        vad.push(v);
        noise.push(fields[2].parse().map_err(|_| bad())?);
    }
    Ok((vad, noise))
}

pub fn write_label_file(path: &Path, vad: &[u8], noise_type: usize) -> Result<()> {
    std::fs::write(path, format_label_file(vad, noise_type))?;
    Ok(())
}

pub fn read_label_file(path: &Path) -> Result<(Vec<u8>, Vec<usize>)> {
    parse_label_file(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_file_and_empty() {
        assert!(labels_from_word_alignments(&[(0, 8000)], 8000, 8000).iter().all(|&l| l == 1));
        let empty = labels_from_word_alignments(&[], 8000, 8000);
        assert_eq!(empty.len(), 100);
        assert!(empty.iter().all(|&l| l == 0));
    }

    #[test]
    fn half_frame_boundary() {
        let labels = labels_from_word_alignments(&[(0, 40)], 800, 8000);
        assert_eq!(labels[0], 1);
        let labels = labels_from_word_alignments(&[(0, 39)], 800, 8000);
        assert_eq!(labels[0], 0);
        // Two touching halves of frame 1 merge into a full frame.
        let labels = labels_from_word_alignments(&[(80, 110), (110, 160), (100, 120)], 800, 8000);
        assert_eq!(labels[..3], [0, 1, 0]);
    }

    #[test]
    fn word_alignment_text() {
        let iv = parse_word_alignments("2400 4800 she\n4800 9000 had\n\n").unwrap();
        assert_eq!(iv, vec![(2400, 4800), (4800, 9000)]);
        assert!(parse_word_alignments("10 5 oops").is_err());
        assert!(parse_word_alignments("abc").is_err());
    }

    #[test]
    fn label_file_round_trip() {
        let text = format_label_file(&[0, 1, 1], 3);
        assert_eq!(text, "0 0 3\n1 1 3\n2 1 3\n");
        assert_eq!(parse_label_file(&text).unwrap(), (vec![0, 1, 1], vec![3, 3, 3]));
        assert!(parse_label_file("1 0 0\n").is_err());
        assert!(parse_label_file("0 2 0\n").is_err());
    }
}
