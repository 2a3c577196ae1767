//! Time-resolved two-photon interference at a beamsplitter, from first-order
//! correlation surfaces of the two input photons.

use serde::Serialize;

use crate::dynamics::{correlation_surface, CorrelationSurface, LowerTriangle};
use crate::error::DetectionError;
use crate::source::model::{InitialState, SourceModel};
use crate::source::program::PulseProgram;
use crate::source::transit::TransitModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativePolarization {
    Parallel,
    Perpendicular,
}

/// Joint detection density p(t₁, t₂) at the two beamsplitter outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceDensity {
    times: Vec<f64>,
    /// values[i * n + j] = p(t_i, t_j)
    values: Vec<f64>,
    /// Largest magnitude removed by clamping negative values to zero.
    pub clamped: f64,
}

impl CoincidenceDensity {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.times.len() + j]
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Trapezoidal ∫∫ p over |t₂ − t₁| < window.
    pub fn integrate(&self, window: f64) -> f64 {
        let w = trapezoid_weights(&self.times);
        let n = self.times.len();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                if (self.times[j] - self.times[i]).abs() < window {
                    total += w[i] * w[j] * self.values[i * n + j];
                }
            }
        }
        total
    }

    /// Density integrated along lines of constant τ = t₂ − t₁, on a uniform
    /// grid: returns (τ, ∫ p(t, t + τ) dt) for τ = k·dt, k = −(n−1)..=(n−1).
    pub fn tau_profile(&self) -> Result<Vec<(f64, f64)>, DetectionError> {
        let n = self.times.len();
        if n < 2 {
            return Ok(Vec::new());
        }
        let dt = self.times[1] - self.times[0];
        if self.times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
            return Err(DetectionError::InvalidParameter {
                name: "times",
                reason: "τ profile needs a uniform grid".into(),
            });
        }
        let mut out = Vec::with_capacity(2 * n - 1);
        for k in -(n as i64 - 1)..=(n as i64 - 1) {
            let pairs: Vec<f64> = (0..n as i64)
                .filter_map(|i| {
                    let j = i + k;
                    (0..n as i64).contains(&j).then(|| self.get(i as usize, j as usize))
                })
                .collect();
            let sum = if pairs.len() == 1 {
                0.0
            } else {
                pairs.windows(2).map(|p| 0.5 * dt * (p[0] + p[1])).sum()
            };
            out.push((k as f64 * dt, sum));
        }
        Ok(out)
    }
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let h = 0.5 * (times[k + 1] - times[k]);
        w[k] += h;
        w[k + 1] += h;
    }
    w
}

/// p(t₁,t₂) = ¼[G_a(t₁,t₁)G_b(t₂,t₂) + G_a(t₂,t₂)G_b(t₁,t₁)
///            − 2·o²·Re(G_a(t₁,t₂)·conj G_b(t₁,t₂))]
/// with the interference term present only for parallel polarization.
/// Surfaces must share a grid and be normalized to emission probability.
pub fn hom_coincidence_density(
    a: &CorrelationSurface,
    b: &CorrelationSurface,
    polarization: RelativePolarization,
    bs_overlap: f64,
) -> Result<CoincidenceDensity, DetectionError> {
    if a.times() != b.times() {
        return Err(DetectionError::GridMismatch);
    }
    if !(0.0..=1.0).contains(&bs_overlap) {
        return Err(DetectionError::InvalidParameter {
            name: "bs_overlap",
            reason: format!("must lie in [0, 1], got {bs_overlap}"),
        });
    }
    let n = a.len();
    let da = a.diagonal();
    let db = b.diagonal();
    let o2 = bs_overlap * bs_overlap;
    let mut values = Vec::with_capacity(n * n);
    let mut clamped: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut p = da[i] * db[j] + da[j] * db[i];
            if polarization == RelativePolarization::Parallel {
                p -= 2.0 * o2 * (a.get(i, j) * b.get(i, j).conj()).re;
            }
            p *= 0.25;
            if p < 0.0 {
                clamped = clamped.max(-p);
                p = 0.0;
            }
            values.push(p);
        }
    }
    Ok(CoincidenceDensity {
        times: a.times().to_vec(),
        values,
        clamped,
    })
}

/// V = 1 − C_par/C_perp with C the coincidences within |t₂ − t₁| < window.
pub fn visibility(
    parallel: &CoincidenceDensity,
    perpendicular: &CoincidenceDensity,
    window: f64,
) -> Result<f64, DetectionError> {
    if parallel.times != perpendicular.times {
        return Err(DetectionError::GridMismatch);
    }
    if !(window > 0.0) {
        return Err(DetectionError::InvalidParameter {
            name: "window",
            reason: format!("must be > 0, got {window}"),
        });
    }
    let c_perp = perpendicular.integrate(window);
    if !(c_perp > 0.0) {
        return Err(DetectionError::Degenerate);
    }
    Ok(1.0 - parallel.integrate(window) / c_perp)
}

/// Default number of grid points across one pulse.
pub const HOM_GRID_POINTS: usize = 61;

/// Output-mode correlation surfaces of the two consecutive photons: σ⁻ from
/// an ω₋ pulse on |−1⟩ and σ⁺ from an ω₊ pulse on |+1⟩, each on the
/// pulse-local grid [0, t_p].
#[derive(Clone, Debug)]
pub struct PhotonPair {
    pub minus: CorrelationSurface,
    pub plus: CorrelationSurface,
}

/// The atom sits at coupling `transit.g_scale` for the whole pulse.
pub fn photon_surfaces(
    model: &SourceModel,
    omega0: f64,
    t_p: f64,
    transit: &TransitModel,
    grid_points: usize,
) -> Result<PhotonPair, DetectionError> {
    if grid_points < 2 {
        return Err(DetectionError::InvalidParameter {
            name: "grid_points",
            reason: format!("need at least 2, got {grid_points}"),
        });
    }
    model.validate()?;
    let transit = TransitModel::constant(transit.g_scale);
    let pair = PulseProgram::alternating(omega0, t_p, model.zeeman(), 1);
    let grid: Vec<f64> = (0..grid_points)
        .map(|k| t_p * k as f64 / (grid_points - 1) as f64)
        .collect();
    let space = model.space();
    let scale = 2.0 * model.cavity.kappa_out();
    let surface = |slot: usize, mf: i32| -> Result<CorrelationSurface, DetectionError> {
        let program = PulseProgram::single(pair.pulses[slot].clone());
        let system = model.system(&program, &transit, 0.5 * t_p)?;
        let rho0 = InitialState::ground(mf)?.density(model, 0.0)?;
        let field = if mf > 0 { space.a_plus() } else { space.a_minus() };
        let g = correlation_surface(
            &rho0,
            &system,
            &field,
            &grid,
            &model.integrator,
            LowerTriangle::Conjugate,
        )?;
        Ok(g.scaled(scale))
    };
    Ok(PhotonPair {
        plus: surface(0, 1)?,
        minus: surface(1, -1)?,
    })
}

#[derive(Clone, Debug)]
pub struct HomOutcome {
    pub photons: PhotonPair,
    pub parallel: CoincidenceDensity,
    pub perpendicular: CoincidenceDensity,
    pub visibility: f64,
}

/// Visibility of interference between consecutively generated photons,
/// integrated over |τ| < t_p.
pub fn hom_visibility(
    model: &SourceModel,
    omega0: f64,
    t_p: f64,
    transit: &TransitModel,
    bs_overlap: f64,
    grid_points: usize,
) -> Result<HomOutcome, DetectionError> {
    let photons = photon_surfaces(model, omega0, t_p, transit, grid_points)?;
    let parallel = hom_coincidence_density(
        &photons.minus,
        &photons.plus,
        RelativePolarization::Parallel,
        bs_overlap,
    )?;
    let perpendicular = hom_coincidence_density(
        &photons.minus,
        &photons.plus,
        RelativePolarization::Perpendicular,
        bs_overlap,
    )?;
    let v = visibility(&parallel, &perpendicular, t_p)?;
    Ok(HomOutcome {
        photons,
        parallel,
        perpendicular,
        visibility: v,
    })
}
