use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{invalid, ModelError};

/// One pump pulse with envelope Ω(t) = Ω₀ sin²(πt/t_p) on [0, t_p].
#[derive(Clone, Debug, PartialEq)]
pub struct PumpPulse {
    /// Peak Rabi frequency on the driven leg, rad/s.
    pub omega0: f64,
    /// Duration, s.
    pub t_p: f64,
    /// Pump-cavity detuning ω_p − ω_c, rad/s.
    pub delta_pc: f64,
    /// Amplitudes of the σ⁺ and σ⁻ components.
    pub weights: (C64, C64),
}

impl PumpPulse {
    /// Linear polarization perpendicular to the quantization axis: equal
    /// σ⁺ and σ⁻ content.
    pub fn linear(omega0: f64, t_p: f64, delta_pc: f64) -> Self {
        Self {
            omega0,
            t_p,
            delta_pc,
            weights: (C64::new(1.0, 0.0), C64::new(1.0, 0.0)),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.omega0 >= 0.0) || !self.omega0.is_finite() {
            return Err(invalid("omega0", format!("must be >= 0, got {}", self.omega0)));
        }
        if !(self.t_p > 0.0) || !self.t_p.is_finite() {
            return Err(invalid("t_p", format!("must be > 0, got {}", self.t_p)));
        }
        if !self.delta_pc.is_finite() {
            return Err(invalid("delta_pc", "must be finite"));
        }
        let (wp, wm) = self.weights;
        if ((wp.norm() - wm.norm()).abs()) > 1e-12 * (1.0 + wp.norm()) {
            return Err(invalid("weights", "linear polarization requires |w+| = |w-|"));
        }
        Ok(())
    }

    /// Rabi frequency Ω(t) at pulse-local time t.
    pub fn rabi(&self, t: f64) -> f64 {
        if !(0.0..=self.t_p).contains(&t) {
            return 0.0;
        }
        let s = (PI * t / self.t_p).sin();
        self.omega0 * s * s
    }

    /// Coefficient (Ω(t)/2)·e^{−iΔ_pc t} of the |e⟩⟨g| part of the drive.
    pub fn raising_coefficient(&self, t: f64) -> C64 {
        let half = 0.5 * self.rabi(t);
        if half == 0.0 {
            return C64::new(0.0, 0.0);
        }
        C64::from_polar(half, -self.delta_pc * t)
    }

    /// True when the pulse is tuned to produce σ⁺ photons (Δ_pc > 0).
    pub fn generates_sigma_plus(&self) -> bool {
        self.delta_pc > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_shape() {
        let p = PumpPulse::linear(2.0, 1.0, 0.0);
        assert_eq!(p.rabi(0.5), 2.0);
        assert!(p.rabi(0.0).abs() < 1e-30);
        assert!(p.rabi(1.0).abs() < 1e-30);
        assert_eq!(p.rabi(-0.1), 0.0);
        assert_eq!(p.rabi(1.1), 0.0);
        assert!((p.rabi(0.25) - 1.0).abs() < 1e-15);
        assert!((p.raising_coefficient(0.5).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polarization_balance_required() {
        let mut p = PumpPulse::linear(1.0, 1.0, 0.0);
        assert!(p.validate().is_ok());
        p.weights.1 = C64::new(0.5, 0.0);
        assert!(p.validate().is_err());
        p.weights.1 = C64::new(0.0, 1.0);
        assert!(p.validate().is_ok());
    }
}
