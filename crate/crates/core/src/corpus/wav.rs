use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Result, VadError};

pub const SUPPORTED_RATES: [u32; 2] = [8000, 16000];

/// Mono waveform scaled to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavAudio {
    pub samples: Vec<f64>,
    pub fs: u32,
}

fn format_err(path: &Path, msg: impl std::fmt::Display) -> VadError {
    VadError::Format(format!("{}: {msg}", path.display()))
}

/// Reads a 16-bit PCM mono file at 8 or 16 kHz.
pub fn load_wav(path: &Path) -> Result<WavAudio> {
    let reader = WavReader::open(path).map_err(|e| format_err(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(format_err(path, format!("{} channels, expected mono", spec.channels)));
    }
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(format_err(
            path,
            format!("{:?} {}-bit samples, expected 16-bit PCM", spec.sample_format, spec.bits_per_sample),
        ));
    }
    if !SUPPORTED_RATES.contains(&spec.sample_rate) {
        return Err(format_err(path, format!("sample rate {} Hz, expected 8000 or 16000", spec.sample_rate)));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| f64::from(v) / 32768.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| format_err(path, e))?;
    Ok(WavAudio {
        samples,
        fs: spec.sample_rate,
    })
}

/// Quantizes to 16-bit PCM mono. Values outside `[-1, 1)` are clipped.
pub fn save_wav(path: &Path, samples: &[f64], fs: u32) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: fs,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| format_err(path, e))?;
    for &s in samples {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(q).map_err(|e| format_err(path, e))?;
    }
    writer.finalize().map_err(|e| format_err(path, e))?;
    Ok(())
}
