//! Physical constants and conversions between laboratory quantities and
//! angular frequencies.
//!
//! Internally every frequency is an angular frequency in rad/s and every
//! time is in seconds. Configuration files carry frequencies in MHz
//! (i.e. value/2π) and are converted at the boundary.

use std::f64::consts::PI;

use crate::error::{invalid, ModelError};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Bohr magneton over Planck's constant, Hz/G.
pub const BOHR_MAGNETON_HZ_PER_GAUSS: f64 = 1.3996e6;

/// Converts a frequency in MHz (ν = ω/2π) to an angular frequency in rad/s.
#[inline]
pub fn mhz_to_rad(mhz: f64) -> f64 {
    2.0 * PI * mhz * 1e6
}

/// Converts an angular frequency in rad/s to MHz (ω/2π).
#[inline]
pub fn rad_to_mhz(rad: f64) -> f64 {
    rad / (2.0 * PI * 1e6)
}

/// Zeeman shift Δ_B = |g_F| μ_B B / ħ of the m_F = ±1 sublevels, in rad/s.
pub fn zeeman_splitting(b_gauss: f64, g_factor: f64) -> Result<f64, ModelError> {
    if !(b_gauss >= 0.0) || !b_gauss.is_finite() {
        return Err(invalid("b_gauss", format!("must be >= 0, got {b_gauss}")));
    }
    if !g_factor.is_finite() {
        return Err(invalid("g_factor", "must be finite"));
    }
    Ok(2.0 * PI * g_factor.abs() * BOHR_MAGNETON_HZ_PER_GAUSS * b_gauss)
}

/// Cavity field decay rate κ = π c / (2 L F) in rad/s, i.e. half of the
/// FSR/F intensity linewidth.
pub fn cavity_kappa(length_m: f64, finesse: f64) -> Result<f64, ModelError> {
    if !(length_m > 0.0) || !length_m.is_finite() {
        return Err(invalid("length", format!("must be > 0, got {length_m}")));
    }
    if !(finesse > 0.0) || !finesse.is_finite() {
        return Err(invalid("finesse", format!("must be > 0, got {finesse}")));
    }
    Ok(PI * SPEED_OF_LIGHT / (2.0 * length_m * finesse))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn zeeman_twenty_gauss() {
        let d = zeeman_splitting(20.0, -0.5).unwrap();
        assert!(rel(rad_to_mhz(d), 14.0) < 0.01);
    }

    #[test]
    fn zeeman_zero_field_and_linearity() {
        assert_eq!(zeeman_splitting(0.0, -0.5).unwrap(), 0.0);
        assert_eq!(zeeman_splitting(0.0, 3.0).unwrap(), 0.0);
        let ten = rad_to_mhz(zeeman_splitting(10.0, -0.5).unwrap());
        // 0.5 * 1.3996 MHz/G * 10 G, by hand
        assert!((ten - 6.998).abs() < 1e-9);
        assert!(rel(ten, 7.0) < 0.01);
    }

    #[test]
    fn zeeman_rejects_negative_field() {
        assert!(zeeman_splitting(-1.0, 0.5).is_err());
        assert!(zeeman_splitting(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn kappa_from_geometry() {
        let k = rad_to_mhz(cavity_kappa(1e-3, 60_000.0).unwrap());
        assert!(rel(k, 1.25) < 0.01);
        let k2 = rad_to_mhz(cavity_kappa(1e-3, 120_000.0).unwrap());
        assert!((k2 - k / 2.0).abs() < 1e-12);
        let k3 = rad_to_mhz(cavity_kappa(2e-3, 60_000.0).unwrap());
        assert!((k3 - k / 2.0).abs() < 1e-12);
        assert!(rel(k2, 0.625) < 0.01);
    }

    #[test]
    fn kappa_rejects_nonpositive() {
        assert!(cavity_kappa(0.0, 1.0).is_err());
        assert!(cavity_kappa(1e-3, -5.0).is_err());
    }

    #[test]
    fn mhz_roundtrip() {
        for v in [0.0, 1.25, -72.2, 3.1e3] {
            assert!((rad_to_mhz(mhz_to_rad(v)) - v).abs() < 1e-12 * (1.0 + v.abs()));
        }
    }
}
