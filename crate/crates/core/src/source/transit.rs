use serde::{Deserialize, Serialize};

use crate::error::{invalid, ModelError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitMode {
    Constant,
    Gaussian,
}

/// Phenomenological atom transit through the cavity mode.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitModel {
    pub mode: TransitMode,
    /// Peak coupling relative to g_max, in (0, 1].
    pub g_scale: f64,
    /// Gaussian mode: 4σ of the coupling profile, s.
    pub duration: f64,
    /// Mean atom arrival rate, 1/s.
    pub arrival_rate: f64,
}

/// Default transit length, s. A 35 μm waist crossed at about 1.4 m/s.
pub const DEFAULT_TRANSIT_DURATION: f64 = 50e-6;

/// Default arrival rate, atoms per second.
pub const DEFAULT_ARRIVAL_RATE: f64 = 2e3;

/// Coupling scales used for transverse-position averaging, equally weighted.
pub const POSITION_AVERAGE_SCALES: [f64; 4] = [1.0, 0.8, 0.6, 0.4];

impl Default for TransitModel {
    fn default() -> Self {
        Self::constant(1.0)
    }
}

impl TransitModel {
    pub fn constant(g_scale: f64) -> Self {
        Self {
            mode: TransitMode::Constant,
            g_scale,
            duration: DEFAULT_TRANSIT_DURATION,
            arrival_rate: DEFAULT_ARRIVAL_RATE,
        }
    }

    pub fn gaussian(g_scale: f64, duration: f64, arrival_rate: f64) -> Self {
        Self {
            mode: TransitMode::Gaussian,
            g_scale,
            duration,
            arrival_rate,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.g_scale >= 0.0 && self.g_scale <= 1.0) {
            return Err(invalid("g_scale", format!("must lie in [0, 1], got {}", self.g_scale)));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(invalid(
                "transit_duration",
                format!("must be > 0, got {}", self.duration),
            ));
        }
        if !(self.arrival_rate >= 0.0) || !self.arrival_rate.is_finite() {
            return Err(invalid(
                "arrival_rate",
                format!("must be >= 0, got {}", self.arrival_rate),
            ));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.duration / 4.0
    }

    /// g(t)/g_max at time `t_rel` from the transit center.
    pub fn scale_at(&self, t_rel: f64) -> f64 {
        match self.mode {
            TransitMode::Constant => self.g_scale,
            TransitMode::Gaussian => {
                let s = self.sigma();
                self.g_scale * (-t_rel * t_rel / (2.0 * s * s)).exp()
            }
        }
    }

    pub fn with_g_scale(&self, g_scale: f64) -> Self {
        Self {
            g_scale,
            ..self.clone()
        }
    }
}
