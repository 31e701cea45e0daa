//! Algorithmic delay of a kernel configuration.
//!
//! Context is counted in input samples: each stride-1 encoder layer needs
//! `k - 1`, the 50%-overlap framing needs `fs/100 - 1`, and each decoder
//! layer needs its kernel span in 10 ms frames. Half of that context lies in
//! the future, so the delay in seconds is `context / (2 fs)`.
//!
//! Two decoder conventions are offered. [`DelayMode::Strict`] charges
//! `(k - 1)` frames per decoder layer, which is what a valid convolution
//! consumes. [`DelayMode::Published`] charges `k` frames, which
//! reproduces the published kernel/delay table for every row except
//! (7, 5, 5).

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VadError};
use crate::model::DEFAULT_EB_KERNELS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayMode {
    Strict,
    Published,
}

impl Default for DelayMode {
    fn default() -> Self {
        DelayMode::Published
    }
}

impl DelayMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DelayMode::Strict => "strict",
            DelayMode::Published => "published",
        }
    }
}

impl fmt::Display for DelayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DelayMode {
    type Err = VadError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(DelayMode::Strict),
            "published" => Ok(DelayMode::Published),
            other => Err(VadError::Config(format!(
                "unknown delay mode '{other}' (expected strict or published)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelaySpec {
    pub fs: u32,
    pub eb_kernels: [usize; 4],
    /// Zero omits the layer.
    pub db_kernels: [usize; 3],
    pub mode: DelayMode,
}

impl DelaySpec {
    pub fn new(fs: u32, eb_kernels: [usize; 4], db_kernels: [usize; 3], mode: DelayMode) -> Result<Self> {
        let spec = DelaySpec {
            fs,
            eb_kernels,
            db_kernels,
            mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Default encoder at `fs` with the given decoder kernels.
    pub fn with_decoder(fs: u32, db_kernels: [usize; 3], mode: DelayMode) -> Result<Self> {
        Self::new(fs, DEFAULT_EB_KERNELS, db_kernels, mode)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fs == 0 || self.fs % 100 != 0 {
            return Err(VadError::Config(format!(
                "fs={} must be a positive multiple of 100",
                self.fs
            )));
        }
        if self.eb_kernels.iter().any(|&k| k == 0) {
            return Err(VadError::Config("encoder kernels must be >= 1".into()));
        }
        Ok(())
    }

    pub fn hop(&self) -> usize {
        (self.fs / 100) as usize
    }

    /// Numerator of the delay formula, in samples.
    pub fn context_samples(&self) -> usize {
        let hop = self.hop();
        let encoder: usize = self.eb_kernels.iter().map(|k| k - 1).sum();
        let framing = hop - 1;
        let decoder_frames: usize = self
            .db_kernels
            .iter()
            .filter(|&&k| k > 0)
            .map(|&k| match self.mode {
                DelayMode::Strict => k - 1,
                DelayMode::Published => k,
            })
            .sum();
        encoder + framing + decoder_frames * hop
    }

    pub fn delay_ms(&self) -> f64 {
        self.context_samples() as f64 * 1000.0 / (2.0 * f64::from(self.fs))
    }
}

/// Length after a valid convolution: `n - k + 1`.
pub fn feature_shrink(n: usize, k: usize) -> Result<usize> {
    if k == 0 {
        return Err(VadError::Config("kernel size must be >= 1".into()));
    }
    if n < k {
        return Err(VadError::InsufficientContext {
            needed: k,
            got: n,
            unit: "time steps",
        });
    }
    Ok(n - k + 1)
}

/// Delay in milliseconds.
pub fn algorithmic_delay(spec: &DelaySpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.delay_ms())
}

/// One row of the published kernel/delay study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PublishedDelay {
    pub db_kernels: [usize; 3],
    pub printed_ms: u32,
}

/// Decoder kernels and printed delays of the published study at 8 kHz.
pub const PUBLISHED_DELAYS: [PublishedDelay; 13] = [
    PublishedDelay { db_kernels: [55, 15, 5], printed_ms: 398 },
    PublishedDelay { db_kernels: [45, 15, 5], printed_ms: 348 },
    PublishedDelay { db_kernels: [35, 15, 5], printed_ms: 298 },
    PublishedDelay { db_kernels: [25, 15, 5], printed_ms: 248 },
    PublishedDelay { db_kernels: [15, 10, 5], printed_ms: 173 },
    PublishedDelay { db_kernels: [10, 7, 5], printed_ms: 133 },
    // Printed as 98; both formulas disagree (93 strict, 108 consistent).
    PublishedDelay { db_kernels: [7, 5, 5], printed_ms: 98 },
    PublishedDelay { db_kernels: [5, 3, 3], printed_ms: 78 },
    PublishedDelay { db_kernels: [3, 3, 2], printed_ms: 63 },
    PublishedDelay { db_kernels: [2, 2, 2], printed_ms: 53 },
    PublishedDelay { db_kernels: [2, 2, 0], printed_ms: 43 },
    PublishedDelay { db_kernels: [2, 0, 0], printed_ms: 33 },
    PublishedDelay { db_kernels: [0, 0, 0], printed_ms: 23 },
];

pub fn published_grid() -> Vec<[usize; 3]> {
    PUBLISHED_DELAYS.iter().map(|r| r.db_kernels).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayRow {
    pub db_kernels: [usize; 3],
    pub mode: DelayMode,
    pub delay_ms: f64,
}

pub fn delay_table(fs: u32, eb_kernels: [usize; 4], grid: &[[usize; 3]], mode: DelayMode) -> Result<Vec<DelayRow>> {
    grid.iter()
        .map(|&db| {
            let spec = DelaySpec::new(fs, eb_kernels, db, mode)?;
            Ok(DelayRow {
                db_kernels: db,
                mode,
                delay_ms: spec.delay_ms(),
            })
        })
        .collect()
}

pub const DELAY_CSV_HEADER: &str = "db1,db2,db3,mode,delay_ms";

/// Writes `db1,db2,db3,mode,delay_ms`.
pub fn write_delay_csv<W: Write>(rows: &[DelayRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{DELAY_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.db_kernels[0], r.db_kernels[1], r.db_kernels[2], r.mode, r.delay_ms
        )?;
    }
    Ok(())
}
