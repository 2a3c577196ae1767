use crate::error::{invalid, ModelError};
use crate::model::units::mhz_to_rad;

/// Two-polarization-mode cavity.
#[derive(Clone, Debug, PartialEq)]
pub struct CavityConfig {
    /// Atom-cavity coupling on the generation transition, rad/s.
    pub g_max: f64,
    /// Field decay rate, rad/s (photon decay 2κ).
    pub kappa: f64,
    /// Fraction of κ leaving through the output mirror.
    pub kappa_out_fraction: f64,
    /// Fock cutoff per polarization mode.
    pub n_max: usize,
    /// Energy of the excited manifold in the cavity frame, ω₀ₑ − ω_c (rad/s).
    pub detuning_c: f64,
}

impl CavityConfig {
    /// (g_max, κ)/2π = (3.1, 1.25) MHz, 93 % output coupling, n_max = 2.
    pub fn reference() -> Self {
        Self {
            g_max: mhz_to_rad(3.1),
            kappa: mhz_to_rad(1.25),
            kappa_out_fraction: 0.93,
            n_max: 2,
            detuning_c: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.g_max >= 0.0) || !self.g_max.is_finite() {
            return Err(invalid("g_max", format!("must be >= 0, got {}", self.g_max)));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(invalid("kappa", format!("must be >= 0, got {}", self.kappa)));
        }
        if !(0.0..=1.0).contains(&self.kappa_out_fraction) {
            return Err(invalid(
                "kappa_out_fraction",
                format!("must lie in [0, 1], got {}", self.kappa_out_fraction),
            ));
        }
        if self.n_max < 1 {
            return Err(invalid("n_max", "must be >= 1"));
        }
        if !self.detuning_c.is_finite() {
            return Err(invalid("detuning_c", "must be finite"));
        }
        Ok(())
    }

    pub fn kappa_out(&self) -> f64 {
        self.kappa_out_fraction * self.kappa
    }

    pub fn kappa_loss(&self) -> f64 {
        (1.0 - self.kappa_out_fraction) * self.kappa
    }
}
