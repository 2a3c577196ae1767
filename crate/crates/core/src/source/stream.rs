use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::dynamics::{trajectory_rng, EmissionRecord, TrajectoryRunner};
use crate::error::SourceError;
use crate::source::model::{InitialState, SourceModel};
use crate::source::program::PulseProgram;
use crate::source::transit::TransitModel;

/// Emissions from a Poisson stream of atoms crossing the cavity.
#[derive(Clone, Debug)]
pub struct AtomStream {
    /// Transit centers, s.
    pub arrivals: Vec<f64>,
    /// Time-ordered events of all atoms.
    pub record: EmissionRecord,
    /// Observation window [0, window], s.
    pub window: f64,
}

/// Atoms arrive as a Poisson process at `transit.arrival_rate` over
/// [0, window]. Each atom sees the pulse train repeated across the window
/// and is simulated as an independent quantum-jump trajectory over
/// center ± duration/2 (clipped to the window). Concurrent atoms do not
/// interact.
pub fn atom_stream(
    model: &SourceModel,
    pulses: &PulseProgram,
    transit: &TransitModel,
    initial: &InitialState,
    window: f64,
    seed: u64,
) -> Result<AtomStream, SourceError> {
    model.validate()?;
    transit.validate()?;
    if !(window > 0.0) || !window.is_finite() {
        return Err(SourceError::Program(format!("window must be > 0, got {window}")));
    }
    let cycle = pulses.period * pulses.pulses.len() as f64;
    let program = PulseProgram {
        repetitions: (window / cycle).ceil().max(1.0) as usize,
        ..pulses.clone()
    };
    program.validate()?;

    let mut rng = trajectory_rng(seed, 0);
    let mean = transit.arrival_rate * window;
    let n_atoms = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize
    } else {
        0
    };
    let mut arrivals: Vec<f64> = (0..n_atoms).map(|_| rng.gen::<f64>() * window).collect();
    arrivals.sort_by(f64::total_cmp);

    let kets = [-1, 0, 1].map(|mf| InitialState::ket(model, mf).ok());
    let half = 0.5 * transit.duration;
    let records = arrivals
        .par_iter()
        .enumerate()
        .map(|(i, &center)| {
            let t0 = (center - half).max(0.0);
            let t1 = (center + half).min(window);
            if t1 <= t0 {
                return Ok(EmissionRecord::new());
            }
            let system = model.system(&program, transit, center)?;
            let mut runner = TrajectoryRunner::new(&system, &model.integrator, (t0, t1));
            let mut rng = trajectory_rng(seed, i as u64 + 1);
            let mf = initial.sample(&mut rng);
            let psi0 = kets[(mf + 1) as usize]
                .clone()
                .ok_or_else(|| SourceError::Program(format!("scheme lacks mF = {mf}")))?;
            Ok(runner.run(&psi0, &[t0, t1], &mut rng, |_, _, _| {})?.record)
        })
        .collect::<Result<Vec<_>, SourceError>>()?;
    Ok(AtomStream {
        arrivals,
        record: EmissionRecord::merge(records),
        window,
    })
}
