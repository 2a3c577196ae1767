use serde::{Deserialize, Serialize};

use crate::error::DetectionError;

/// Polarization routing in front of the two fibers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveplateMode {
    /// σ⁺ to the short fiber, σ⁻ to the long fiber.
    Polarizing,
    /// Each photon takes either fiber with probability ½.
    Balanced,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionConfig {
    pub waveplate_mode: WaveplateMode,
    /// Extra delay of the long fiber, s.
    pub delay_long: f64,
    /// Photons routed into a blocked long fiber are lost.
    pub long_fiber_open: bool,
    /// Spatial mode-match amplitude at the beamsplitter.
    pub bs_overlap: f64,
    pub detector_efficiency: f64,
    /// Per detector, counts/s.
    pub dark_rate: f64,
    /// Histogram bin width, s.
    pub bin_width: f64,
}

pub const DEFAULT_BS_OVERLAP: f64 = 0.9899;
pub const DEFAULT_DELAY_LONG: f64 = 1.42e-6;
pub const DEFAULT_EFFICIENCY: f64 = 0.05;
pub const DEFAULT_DARK_RATE: f64 = 100.0;
pub const DEFAULT_BIN_WIDTH: f64 = 150e-9;

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            waveplate_mode: WaveplateMode::Polarizing,
            delay_long: DEFAULT_DELAY_LONG,
            long_fiber_open: true,
            bs_overlap: DEFAULT_BS_OVERLAP,
            detector_efficiency: DEFAULT_EFFICIENCY,
            dark_rate: DEFAULT_DARK_RATE,
            bin_width: DEFAULT_BIN_WIDTH,
        }
    }
}

impl DetectionConfig {
    /// Single-path intensity correlation setup.
    pub fn hbt() -> Self {
        Self {
            waveplate_mode: WaveplateMode::Balanced,
            long_fiber_open: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), DetectionError> {
        let unit = |name: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(DetectionError::InvalidParameter {
                    name,
                    reason: format!("must lie in [0, 1], got {v}"),
                })
            }
        };
        unit("bs_overlap", self.bs_overlap)?;
        unit("detector_efficiency", self.detector_efficiency)?;
        if !(self.delay_long >= 0.0) || !self.delay_long.is_finite() {
            return Err(DetectionError::InvalidParameter {
                name: "delay_long",
                reason: format!("must be >= 0, got {}", self.delay_long),
            });
        }
        if !(self.dark_rate >= 0.0) || !self.dark_rate.is_finite() {
            return Err(DetectionError::InvalidParameter {
                name: "dark_rate",
                reason: format!("must be >= 0, got {}", self.dark_rate),
            });
        }
        if !(self.bin_width > 0.0) || !self.bin_width.is_finite() {
            return Err(DetectionError::InvalidParameter {
                name: "bin_width",
                reason: format!("must be > 0, got {}", self.bin_width),
            });
        }
        Ok(())
    }
}
