//! Visibility and conditional generation efficiency over a grid of pump
//! amplitudes and pulse durations.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::detection::config::DetectionConfig;
use crate::detection::hom::hom_visibility;
use crate::model::units::rad_to_mhz;
use crate::source::conditional::{conditional_probabilities, ConditionalProbabilities};
use crate::source::model::{InitialState, SourceModel};
use crate::source::program::PulseProgram;
use crate::source::transit::TransitModel;

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSettings {
    /// Peak pump Rabi frequencies, rad/s.
    pub omega0: Vec<f64>,
    /// Pulse durations, s.
    pub t_p: Vec<f64>,
    /// Trajectories per point; 0 skips the conditional estimate.
    pub trajectories: usize,
    /// ω₊/ω₋ pairs per trajectory.
    pub pulse_pairs: usize,
    pub grid_points: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct ScanPoint {
    pub omega0: f64,
    pub t_p: f64,
    pub visibility: Option<f64>,
    pub conditional: Option<ConditionalProbabilities>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ScanTable {
    pub points: Vec<ScanPoint>,
}

/// Seed of grid point `index`; point 0 uses the run seed itself.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Ω₀-major traversal: point i ↔ (omega0[i / n_tp], t_p[i % n_tp]).
pub fn visibility_scan(
    model: &SourceModel,
    settings: &ScanSettings,
    transit: &TransitModel,
    detection: &DetectionConfig,
    initial: &InitialState,
) -> ScanTable {
    let grid: Vec<(f64, f64)> = settings
        .omega0
        .iter()
        .flat_map(|&w| settings.t_p.iter().map(move |&t| (w, t)))
        .collect();
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(omega0, t_p))| {
            let mut point = ScanPoint {
                omega0,
                t_p,
                visibility: None,
                conditional: None,
                error: None,
            };
            match hom_visibility(model, omega0, t_p, transit, detection.bs_overlap, settings.grid_points) {
                Ok(h) => point.visibility = Some(h.visibility),
                Err(e) => point.error = Some(e.to_string()),
            }
            if settings.trajectories > 0 {
                let program = PulseProgram::alternating(omega0, t_p, model.zeeman(), settings.pulse_pairs);
                match conditional_probabilities(
                    model,
                    &program,
                    transit,
                    initial,
                    settings.trajectories,
                    point_seed(settings.seed, i),
                ) {
                    Ok(c) => point.conditional = Some(c),
                    Err(e) => {
                        let msg = e.to_string();
                        point.error = Some(match point.error.take() {
                            Some(prev) => format!("{prev}; {msg}"),
                            None => msg,
                        });
                    }
                }
            }
            point
        })
        .collect();
    ScanTable { points }
}

impl ScanTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("omega0_MHz,tp_us,visibility,p_plus_given_minus,p_minus_given_plus\n");
        let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |v| v.to_string());
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                rad_to_mhz(p.omega0),
                p.t_p * 1e6,
                opt(p.visibility),
                opt(p.conditional.as_ref().map(|c| c.plus_given_minus.probability)),
                opt(p.conditional.as_ref().map(|c| c.minus_given_plus.probability)),
            );
        }
        s
    }

    /// Whether V falls strictly as Ω₀ grows, at every t_p. `None` when a
    /// needed value is missing or no t_p has two Ω₀ values.
    pub fn decreasing_in_omega0(&self) -> Option<bool> {
        self.decreasing(|p| p.t_p, |p| p.omega0)
    }

    /// Whether V falls strictly as t_p grows, at every Ω₀.
    pub fn decreasing_in_t_p(&self) -> Option<bool> {
        self.decreasing(|p| p.omega0, |p| p.t_p)
    }

    fn decreasing<K, X>(&self, key: K, x: X) -> Option<bool>
    where
        K: Fn(&ScanPoint) -> f64,
        X: Fn(&ScanPoint) -> f64,
    {
        let mut keys: Vec<f64> = self.points.iter().map(&key).collect();
        keys.sort_by(f64::total_cmp);
        keys.dedup();
        let mut compared = false;
        for k in keys {
            let mut line: Vec<(f64, f64)> = Vec::new();
            for p in self.points.iter().filter(|p| key(p) == k) {
                line.push((x(p), p.visibility?));
            }
            line.sort_by(|a, b| a.0.total_cmp(&b.0));
            if line.len() < 2 {
                continue;
            }
            compared = true;
            if line.windows(2).any(|w| !(w[1].1 < w[0].1)) {
                return Some(false);
            }
        }
        compared.then_some(true)
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }
}
