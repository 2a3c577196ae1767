use std::fmt::Write as _;

use crate::dynamics::{evolve_master, DensityState};
use crate::error::SourceError;
use crate::source::model::{InitialState, SourceModel};
use crate::source::program::PulseProgram;
use crate::source::transit::{TransitModel, POSITION_AVERAGE_SCALES};

/// Integrated output per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotTotals {
    pub slot: usize,
    pub start: f64,
    /// The slot's pulse is tuned to the σ⁺ Raman resonance.
    pub generates_plus: bool,
    /// ∫ flux dt over the slot, photons.
    pub plus: f64,
    pub minus: f64,
}

/// Output-mirror photon flux 2κ_out⟨a_q†a_q⟩ per polarization, 1/s.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonEnvelope {
    pub times: Vec<f64>,
    pub flux_plus: Vec<f64>,
    pub flux_minus: Vec<f64>,
    pub slots: Vec<SlotTotals>,
    pub period: f64,
}

pub const ENVELOPE_CSV_HEADER: &str = "time_s,flux_plus,flux_minus";

impl PhotonEnvelope {
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(48 * self.times.len());
        s.push_str(ENVELOPE_CSV_HEADER);
        s.push('\n');
        for ((t, p), m) in self.times.iter().zip(&self.flux_plus).zip(&self.flux_minus) {
            let _ = writeln!(s, "{t:e},{p:e},{m:e}");
        }
        s
    }

    pub fn total_plus(&self) -> f64 {
        self.slots.iter().map(|s| s.plus).sum()
    }

    pub fn total_minus(&self) -> f64 {
        self.slots.iter().map(|s| s.minus).sum()
    }

    /// Weighted sum of envelopes on a common grid.
    pub fn weighted_sum(parts: &[(PhotonEnvelope, f64)]) -> Option<Self> {
        let (first, _) = parts.first()?;
        let mut out = first.clone();
        let scale = |v: &mut Vec<f64>, w: f64| v.iter_mut().for_each(|x| *x *= w);
        scale(&mut out.flux_plus, parts[0].1);
        scale(&mut out.flux_minus, parts[0].1);
        for s in &mut out.slots {
            s.plus *= parts[0].1;
            s.minus *= parts[0].1;
        }
        for (env, w) in &parts[1..] {
            if env.times != out.times {
                return None;
            }
            for (a, b) in out.flux_plus.iter_mut().zip(&env.flux_plus) {
                *a += w * b;
            }
            for (a, b) in out.flux_minus.iter_mut().zip(&env.flux_minus) {
                *a += w * b;
            }
            for (a, b) in out.slots.iter_mut().zip(&env.slots) {
                a.plus += w * b.plus;
                a.minus += w * b.minus;
            }
        }
        Some(out)
    }
}

/// Envelope and the density matrix at the end of the program.
#[derive(Clone, Debug)]
pub struct SequenceOutcome {
    pub envelope: PhotonEnvelope,
    pub final_state: DensityState,
}

/// Master-equation run over the whole program; the atom is carried from
/// pulse to pulse. A Gaussian transit is centered on the program midpoint.
pub fn run_sequence(
    model: &SourceModel,
    program: &PulseProgram,
    transit: &TransitModel,
    initial: &InitialState,
) -> Result<PhotonEnvelope, SourceError> {
    run_sequence_with_state(model, program, transit, initial).map(|o| o.envelope)
}

pub fn run_sequence_with_state(
    model: &SourceModel,
    program: &PulseProgram,
    transit: &TransitModel,
    initial: &InitialState,
) -> Result<SequenceOutcome, SourceError> {
    model.validate()?;
    let system = model.system(program, transit, 0.5 * program.duration())?;
    let space = model.space();
    let n_plus = space.number_plus();
    let n_minus = space.number_minus();
    let rate = 2.0 * model.cavity.kappa_out();
    let grid = model.time_grid(program);
    let per = model.samples_per_pulse;

    let mut rho = initial.density(model, 0.0)?;
    let mut flux_plus = Vec::with_capacity(grid.len());
    let mut flux_minus = Vec::with_capacity(grid.len());
    let mut push = |r: &DensityState| {
        flux_plus.push((rate * r.expectation(&n_plus).re).max(0.0));
        flux_minus.push((rate * r.expectation(&n_minus).re).max(0.0));
    };
    push(&rho);
    for slot in 0..program.len() {
        let slot_grid = &grid[slot * per + 1..=(slot + 1) * per];
        let states = evolve_master(&rho, &system, slot_grid, &model.integrator)
            .map_err(|source| SourceError::Pulse { pulse: slot, source })?;
        states.iter().for_each(&mut push);
        rho = states.into_iter().last().expect("nonempty slot grid");
    }

    let slots = (0..program.len())
        .map(|slot| {
            let r = slot * per..=(slot + 1) * per;
            SlotTotals {
                slot,
                start: program.slot_start(slot),
                generates_plus: program.pulse(slot).generates_sigma_plus(),
                plus: trapezoid(&grid[r.clone()], &flux_plus[r.clone()]),
                minus: trapezoid(&grid[r.clone()], &flux_minus[r]),
            }
        })
        .collect();
    Ok(SequenceOutcome {
        envelope: PhotonEnvelope {
            times: grid,
            flux_plus,
            flux_minus,
            slots,
            period: program.period,
        },
        final_state: rho,
    })
}

/// Average over transverse positions: equal weights on the
/// [`POSITION_AVERAGE_SCALES`] multiples of the transit's g_scale.
pub fn run_sequence_position_averaged(
    model: &SourceModel,
    program: &PulseProgram,
    transit: &TransitModel,
    initial: &InitialState,
) -> Result<PhotonEnvelope, SourceError> {
    let w = 1.0 / POSITION_AVERAGE_SCALES.len() as f64;
    let parts = POSITION_AVERAGE_SCALES
        .iter()
        .map(|s| run_sequence(model, program, &transit.with_g_scale(transit.g_scale * s), initial).map(|e| (e, w)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PhotonEnvelope::weighted_sum(&parts).expect("common grid"))
}

pub(crate) fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

/// Peak emission times in pulse-local time, s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakTimes {
    pub plus: Option<f64>,
    pub minus: Option<f64>,
}

/// Argmax of each polarization's flux within the first slot whose pulse
/// generates that polarization and that carries nonzero flux. Ties go to the
/// earliest sample. A one-sample envelope reports that sample.
pub fn peak_flux_times(envelope: &PhotonEnvelope) -> PeakTimes {
    if envelope.times.len() == 1 {
        let t = envelope.times[0];
        let local = t - (t / envelope.period).floor() * envelope.period;
        return PeakTimes {
            plus: (envelope.flux_plus[0] > 0.0).then_some(local),
            minus: (envelope.flux_minus[0] > 0.0).then_some(local),
        };
    }
    let find = |plus: bool| {
        let flux = if plus {
            &envelope.flux_plus
        } else {
            &envelope.flux_minus
        };
        for s in envelope.slots.iter().filter(|s| s.generates_plus == plus) {
            let end = s.start + envelope.period;
            let mut best: Option<(f64, f64)> = None;
            for (t, f) in envelope.times.iter().zip(flux) {
                if *t < s.start || *t > end {
                    continue;
                }
                if best.is_none_or(|(_, b)| *f > b) {
                    best = Some((*t, *f));
                }
            }
            if let Some((t, f)) = best {
                if f > 0.0 {
                    return Some(t - s.start);
                }
            }
        }
        None
    };
    PeakTimes {
        plus: find(true),
        minus: find(false),
    }
}
