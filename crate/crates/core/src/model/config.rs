use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autograd::LEAKY_SLOPE;
use crate::error::{Result, VadError};

/// Kernel sizes, channel widths and training-time knobs of a [`VadNetwork`](super::VadNetwork).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Sampling rate in Hz; must be a multiple of 100.
    pub fs: u32,
    pub eb_kernels: [usize; 4],
    pub eb_channels: [usize; 4],
    /// Framing window in samples, two frame hops long.
    pub fb_frame_len: usize,
    /// Framing hop in samples, one 10 ms frame.
    pub fb_stride: usize,
    pub fb_channels: usize,
    /// A zero kernel size omits that decoder layer.
    pub db_kernels: [usize; 3],
    pub db_channels: usize,
    pub dn_kernels: [usize; 3],
    pub dn_channels: usize,
    /// Scale of the reversed noise-type gradient flowing into EB/FB.
    pub alpha: f64,
    /// Number of noise types N; the discriminator predicts N + 1 classes.
    pub n_noise_types: usize,
    #[serde(default = "default_slope")]
    pub leaky_slope: f64,
    #[serde(default = "default_true")]
    pub with_discriminator: bool,
}

fn default_slope() -> f64 {
    LEAKY_SLOPE
}

fn default_true() -> bool {
    true
}

/// Encoder kernels whose summed context `Σ(k - 1)` is 289 samples.
pub const DEFAULT_EB_KERNELS: [usize; 4] = [30, 30, 80, 153];
pub const DEFAULT_DB_KERNELS: [usize; 3] = [55, 15, 5];
pub const DEFAULT_DN_KERNELS: [usize; 3] = [55, 15, 5];

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::standard(8000)
    }
}

impl NetworkConfig {
    /// Full-size network at sampling rate `fs`.
    pub fn standard(fs: u32) -> Self {
        let hop = (fs / 100) as usize;
        NetworkConfig {
            fs,
            eb_kernels: DEFAULT_EB_KERNELS,
            eb_channels: [32; 4],
            fb_frame_len: 2 * hop,
            fb_stride: hop,
            fb_channels: 32,
            db_kernels: DEFAULT_DB_KERNELS,
            db_channels: 32,
            dn_kernels: DEFAULT_DN_KERNELS,
            dn_channels: 32,
            alpha: 0.1,
            n_noise_types: 4,
            leaky_slope: LEAKY_SLOPE,
            with_discriminator: true,
        }
    }

    /// Miniature network for finite-difference checks: 400 Hz, framing hop 4.
    pub fn gradcheck() -> Self {
        NetworkConfig {
            fs: 400,
            eb_kernels: [3, 3, 3, 3],
            eb_channels: [2, 3, 2, 3],
            fb_frame_len: 8,
            fb_stride: 4,
            fb_channels: 3,
            db_kernels: [5, 3, 3],
            db_channels: 3,
            dn_kernels: [5, 3, 3],
            dn_channels: 3,
            alpha: 0.1,
            n_noise_types: 2,
            leaky_slope: LEAKY_SLOPE,
            with_discriminator: true,
        }
    }

    /// Small 8 kHz network that trains on one core in seconds per epoch.
    pub fn toy() -> Self {
        NetworkConfig {
            fs: 8000,
            eb_kernels: [9, 9, 9, 9],
            eb_channels: [4, 4, 4, 4],
            fb_frame_len: 160,
            fb_stride: 80,
            fb_channels: 16,
            db_kernels: [5, 3, 3],
            db_channels: 16,
            dn_kernels: [5, 3, 3],
            dn_channels: 16,
            alpha: 0.1,
            n_noise_types: 4,
            leaky_slope: LEAKY_SLOPE,
            with_discriminator: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(VadError::Config(msg));
        if self.fs == 0 || self.fs % 100 != 0 {
            return fail(format!("fs={} must be a positive multiple of 100", self.fs));
        }
        let hop = (self.fs / 100) as usize;
        if self.fb_stride != hop {
            return fail(format!("fb_stride={} must equal fs/100={hop}", self.fb_stride));
        }
        if self.fb_frame_len != 2 * hop {
            return fail(format!(
                "fb_frame_len={} must equal 2*fb_stride={}",
                self.fb_frame_len,
                2 * hop
            ));
        }
        if self.eb_kernels.iter().any(|&k| k == 0) || self.dn_kernels.iter().any(|&k| k == 0) {
            return fail("encoder and discriminator kernels must be >= 1".into());
        }
        if self.eb_channels.iter().any(|&c| c == 0)
            || self.fb_channels == 0
            || self.db_channels == 0
            || self.dn_channels == 0
        {
            return fail("channel widths must be positive".into());
        }
        if self.n_noise_types == 0 {
            return fail("n_noise_types must be >= 1".into());
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return fail(format!("alpha={} must be finite and nonnegative", self.alpha));
        }
        if !(self.leaky_slope >= 0.0) {
            return fail(format!("leaky_slope={} must be nonnegative", self.leaky_slope));
        }
        Ok(())
    }

    pub fn noise_classes(&self) -> usize {
        self.n_noise_types + 1
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: NetworkConfig =
            toml::from_str(text).map_err(|e| VadError::Config(format!("bad network config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for cfg in [NetworkConfig::default(), NetworkConfig::gradcheck(), NetworkConfig::toy(), NetworkConfig::standard(16000)] {
            cfg.validate().unwrap();
        }
        let eb_context: usize = DEFAULT_EB_KERNELS.iter().map(|k| k - 1).sum();
        assert_eq!(eb_context, 289);
    }

    #[test]
    fn framing_invariants_enforced() {
        let mut cfg = NetworkConfig::default();
        cfg.fb_stride = 40;
        assert!(cfg.validate().is_err());
        let mut cfg = NetworkConfig::default();
        cfg.fb_frame_len = 80;
        assert!(cfg.validate().is_err());
        let mut cfg = NetworkConfig::default();
        cfg.fs = 8050;
        assert!(cfg.validate().is_err());
        let mut cfg = NetworkConfig::default();
        cfg.alpha = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = NetworkConfig::toy();
        cfg.db_kernels = [2, 0, 0];
        cfg.alpha = 0.01;
        let back = NetworkConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert!(NetworkConfig::from_toml("fs = 8000\nbogus = 1").is_err());
    }
}
