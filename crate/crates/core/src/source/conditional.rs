use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{trajectory_rng, EmissionRecord, TrajectoryRunner};
use crate::error::SourceError;
use crate::model::hamiltonian::Channel;
use crate::source::model::{InitialState, SourceModel};
use crate::source::program::PulseProgram;
use crate::source::transit::TransitModel;

/// Below this many conditioning events the result is flagged.
pub const MIN_CONDITIONING_EVENTS: usize = 100;

/// Binomial estimate of one conditional probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionalEstimate {
    pub probability: f64,
    pub std_error: f64,
    /// Conditioning events (photon in the earlier pulse).
    pub conditioning: usize,
    /// Of those, events followed by the other polarization.
    pub successes: usize,
    pub low_statistics: bool,
}

impl ConditionalEstimate {
    /// Low-statistics estimates use the maximal Bernoulli variance.
    pub fn from_counts(successes: usize, conditioning: usize) -> Self {
        let low = conditioning < MIN_CONDITIONING_EVENTS;
        if conditioning == 0 {
            return Self {
                probability: 0.0,
                std_error: 0.5,
                conditioning,
                successes,
                low_statistics: true,
            };
        }
        let n = conditioning as f64;
        let p = successes as f64 / n;
        let var = if low { (p * (1.0 - p)).max(0.25) } else { p * (1.0 - p) };
        Self {
            probability: p,
            std_error: (var / n).sqrt(),
            conditioning,
            successes,
            low_statistics: low,
        }
    }
}

/// p(σ⁺|σ⁻) and p(σ⁻|σ⁺) for intracavity generation (no detector losses).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalProbabilities {
    pub plus_given_minus: ConditionalEstimate,
    pub minus_given_plus: ConditionalEstimate,
    pub trajectories: usize,
    pub seed: u64,
}

impl ConditionalProbabilities {
    pub fn low_statistics(&self) -> bool {
        self.plus_given_minus.low_statistics || self.minus_given_plus.low_statistics
    }
}

/// Output-mirror photons per slot: (σ⁺ seen, σ⁻ seen).
pub fn slot_flags(record: &EmissionRecord, program: &PulseProgram) -> Vec<(bool, bool)> {
    let mut flags = vec![(false, false); program.len()];
    for e in record.outputs() {
        if let Some(slot) = program.slot_of(e.time) {
            match e.channel {
                Channel::OutputPlus => flags[slot].0 = true,
                Channel::OutputMinus => flags[slot].1 = true,
                _ => {}
            }
        }
    }
    flags
}

/// Counts (successes, conditioning) for both orderings over consecutive
/// slot pairs: σ⁻ in an ω₋ slot followed by σ⁺ in the next ω₊ slot, and the
/// reverse.
pub fn count_pairs(flags: &[(bool, bool)], program: &PulseProgram) -> [(usize, usize); 2] {
    let mut pm = (0, 0);
    let mut mp = (0, 0);
    for k in 0..flags.len().saturating_sub(1) {
        let this_plus = program.pulse(k).generates_sigma_plus();
        let next_plus = program.pulse(k + 1).generates_sigma_plus();
        if !this_plus && next_plus && flags[k].1 {
            pm.1 += 1;
            pm.0 += flags[k + 1].0 as usize;
        }
        if this_plus && !next_plus && flags[k].0 {
            mp.1 += 1;
            mp.0 += flags[k + 1].1 as usize;
        }
    }
    [pm, mp]
}

/// Quantum-jump estimate over `n_trajectories` runs of `program`.
/// Trajectory i uses stream i of `seed` and starts in a ground sublevel
/// drawn from `initial`.
pub fn conditional_probabilities(
    model: &SourceModel,
    program: &PulseProgram,
    transit: &TransitModel,
    initial: &InitialState,
    n_trajectories: usize,
    seed: u64,
) -> Result<ConditionalProbabilities, SourceError> {
    let records = trajectory_records(model, program, transit, initial, n_trajectories, seed)?;
    let mut pm = (0, 0);
    let mut mp = (0, 0);
    for r in &records {
        let [a, b] = count_pairs(&slot_flags(r, program), program);
        pm = (pm.0 + a.0, pm.1 + a.1);
        mp = (mp.0 + b.0, mp.1 + b.1);
    }
    Ok(ConditionalProbabilities {
        plus_given_minus: ConditionalEstimate::from_counts(pm.0, pm.1),
        minus_given_plus: ConditionalEstimate::from_counts(mp.0, mp.1),
        trajectories: n_trajectories,
        seed,
    })
}

/// Emission records of independent trajectories over the whole program.
pub fn trajectory_records(
    model: &SourceModel,
    program: &PulseProgram,
    transit: &TransitModel,
    initial: &InitialState,
    n_trajectories: usize,
    seed: u64,
) -> Result<Vec<EmissionRecord>, SourceError> {
    model.validate()?;
    let system = model.system(program, transit, 0.5 * program.duration())?;
    let grid: Vec<f64> = (0..=program.len()).map(|k| program.slot_start(k)).collect();
    let kets = [-1, 0, 1].map(|mf| InitialState::ket(model, mf).ok());
    let span = (0.0, program.duration());
    (0..n_trajectories)
        .into_par_iter()
        .map_init(
            || TrajectoryRunner::new(&system, &model.integrator, span),
            |runner, i| {
                let mut rng = trajectory_rng(seed, i as u64);
                let mf = initial.sample(&mut rng);
                let psi0 = kets[(mf + 1) as usize]
                    .clone()
                    .ok_or_else(|| SourceError::Program(format!("scheme lacks mF = {mf}")))?;
                let out = runner.run(&psi0, &grid, &mut rng, |_, _, _| {})?;
                Ok(out.record)
            },
        )
        .collect()
}
