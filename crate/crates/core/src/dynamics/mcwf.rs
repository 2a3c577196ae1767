//! Monte Carlo wave-function (quantum jump) trajectories.
//!
//! The state evolves under H_eff = H − (i/2) Σ C†C without renormalization
//! until its squared norm falls to a uniformly drawn threshold. The crossing
//! time is located by bisection, a channel is chosen with probability
//! ∝ ‖C_k ψ‖², and the state is replaced by the normalized C_k ψ.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::integrator::{check_grid, IntegratorOptions, Rhs, Stepper};
use crate::dynamics::record::EmissionRecord;
use crate::dynamics::system::OpenSystem;
use crate::error::DynamicsError;
use crate::model::operator::Operator;

/// Jump times are resolved to this width, s.
pub const JUMP_TIME_RESOLUTION: f64 = 1e-12;

const NORM_UNDERFLOW: f64 = 1e-300;

/// Independent, reproducible stream for trajectory `index` of a run seeded
/// with `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct VectorRhs<'a> {
    system: &'a OpenSystem,
    values: Vec<C64>,
    assembled_for: Vec<C64>,
}

impl<'a> VectorRhs<'a> {
    fn new(system: &'a OpenSystem) -> Self {
        Self {
            system,
            values: Vec::new(),
            assembled_for: Vec::new(),
        }
    }
}

impl Rhs for VectorRhs<'_> {
    fn len(&self) -> usize {
        self.system.dim()
    }

    fn coefficients(&self, t: f64, buf: &mut Vec<C64>) {
        self.system.generator().coefficients_into(t, buf);
    }

    fn eval(&mut self, coeffs: &[C64], x: &[C64], out: &mut [C64]) {
        let compiled = self.system.compiled();
        if self.assembled_for.as_slice() != coeffs || self.values.is_empty() {
            compiled.assemble(coeffs, &mut self.values);
            self.assembled_for.clear();
            self.assembled_for.extend_from_slice(coeffs);
        }
        compiled.apply(&self.values, x, out);
    }
}

#[inline]
fn norm_sq(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

#[derive(Clone, Debug)]
pub struct McwfOutcome {
    /// Normalized state at the last grid time.
    pub final_state: Vec<C64>,
    pub record: EmissionRecord,
}

/// Reusable single-trajectory integrator.
pub struct TrajectoryRunner<'a> {
    system: &'a OpenSystem,
    stepper: Stepper<VectorRhs<'a>>,
    jump_buf: Vec<C64>,
    state_buf: Vec<C64>,
    before: Vec<C64>,
}

impl<'a> TrajectoryRunner<'a> {
    /// `span` is the time interval used to bound the generator norm.
    pub fn new(system: &'a OpenSystem, opts: &IntegratorOptions, span: (f64, f64)) -> Self {
        let nominal = opts.nominal_step(system, span.0, span.1);
        let dim = system.dim();
        Self {
            system,
            stepper: Stepper::new(VectorRhs::new(system), opts.clone(), nominal),
            jump_buf: vec![C64::new(0.0, 0.0); dim],
            state_buf: vec![C64::new(0.0, 0.0); dim],
            before: vec![C64::new(0.0, 0.0); dim],
        }
    }

    /// Runs one trajectory over `t_grid`. `observe(i, psi, norm_sq)` is
    /// called at each grid time with the unnormalized state.
    pub fn run<R, F>(
        &mut self,
        psi0: &[C64],
        t_grid: &[f64],
        rng: &mut R,
        mut observe: F,
    ) -> Result<McwfOutcome, DynamicsError>
    where
        R: Rng,
        F: FnMut(usize, &[C64], f64),
    {
        check_grid(t_grid)?;
        if psi0.len() != self.system.dim() {
            return Err(DynamicsError::Dimension {
                expected: self.system.dim(),
                found: psi0.len(),
            });
        }
        let n0 = norm_sq(psi0);
        if (n0 - 1.0).abs() > 1e-9 {
            return Err(DynamicsError::InitialState(format!("norm² {n0} is not 1")));
        }
        let mut psi = psi0.to_vec();
        let mut record = EmissionRecord::new();
        let closed = self.system.collapse().is_empty();
        let mut threshold: f64 = rng.gen();
        let Some(&t_first) = t_grid.first() else {
            return Ok(McwfOutcome {
                final_state: psi,
                record,
            });
        };
        observe(0, &psi, norm_sq(&psi));
        let mut t = t_first;
        for (i, &target) in t_grid.iter().enumerate().skip(1) {
            let n = self.stepper.substeps(t, target);
            let h = (target - t) / n as f64;
            let start = t;
            for k in 0..n {
                let t_k = start + h * k as f64;
                let t_next = if k + 1 == n { target } else { start + h * (k + 1) as f64 };
                if closed {
                    let drift = |a: &[C64], b: &[C64]| (norm_sq(b) - norm_sq(a)).abs();
                    self.stepper.checked_step(&mut psi, t_k, t_next - t_k, &drift)?;
                } else {
                    self.step_with_jumps(&mut psi, t_k, t_next, &mut threshold, rng, &mut record)?;
                }
            }
            t = target;
            observe(i, &psi, norm_sq(&psi));
        }
        let n = norm_sq(&psi).sqrt();
        psi.iter_mut().for_each(|v| *v /= n);
        Ok(McwfOutcome {
            final_state: psi,
            record,
        })
    }

    fn step_with_jumps<R: Rng>(
        &mut self,
        psi: &mut [C64],
        t0: f64,
        t1: f64,
        threshold: &mut f64,
        rng: &mut R,
        record: &mut EmissionRecord,
    ) -> Result<(), DynamicsError> {
        // The non-Hermitian evolution may not gain norm.
        let drift = |a: &[C64], b: &[C64]| (norm_sq(b) - norm_sq(a)).max(0.0);
        let mut t = t0;
        while t1 - t > 0.0 {
            let remaining = t1 - t;
            self.before.copy_from_slice(psi);
            self.stepper.checked_step(psi, t, remaining, &drift)?;
            let n_after = norm_sq(psi);
            if n_after > *threshold {
                t = t1;
                continue;
            }
            // Bisect the crossing on single steps from the saved state.
            let (mut lo, mut hi) = (0.0, remaining);
            self.state_buf.copy_from_slice(psi);
            while hi - lo > JUMP_TIME_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                self.stepper.raw_step(t, mid, &self.before, &mut self.jump_buf);
                if norm_sq(&self.jump_buf) > *threshold {
                    lo = mid;
                } else {
                    hi = mid;
                    self.state_buf.copy_from_slice(&self.jump_buf);
                }
            }
            let t_jump = t + hi;
            let n_jump = norm_sq(&self.state_buf);
            if n_jump < NORM_UNDERFLOW {
                return Err(DynamicsError::NormUnderflow {
                    time: t_jump,
                    norm_sq: n_jump,
                });
            }
            let weights: Vec<f64> = self
                .system
                .collapse()
                .iter()
                .map(|c| {
                    c.op.apply(&self.state_buf, &mut self.jump_buf);
                    norm_sq(&self.jump_buf)
                })
                .collect();
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                // Norm lost to integration error only; renormalize.
                let s = n_jump.sqrt();
                for (p, v) in psi.iter_mut().zip(&self.state_buf) {
                    *p = v / s;
                }
            } else {
                let mut u = rng.gen::<f64>() * total;
                let mut chosen = weights.len() - 1;
                for (k, w) in weights.iter().enumerate() {
                    if u < *w {
                        chosen = k;
                        break;
                    }
                    u -= w;
                }
                let c = &self.system.collapse()[chosen];
                c.op.apply(&self.state_buf, &mut self.jump_buf);
                let s = weights[chosen].sqrt();
                for (p, v) in psi.iter_mut().zip(&self.jump_buf) {
                    *p = v / s;
                }
                // Bisection can land two jumps in the same resolution cell.
                let mut t_rec = t_jump;
                if let Some(last) = record.events().last() {
                    if t_rec <= last.time {
                        t_rec = f64::from_bits(last.time.to_bits() + 1);
                    }
                }
                record.push(t_rec, c.channel).expect("jump times increase");
            }
            *threshold = rng.gen();
            t = t_jump;
        }
        Ok(())
    }
}

/// One quantum-jump trajectory with a fresh generator seeded by `seed`.
pub fn mcwf_run(
    psi0: &[C64],
    system: &OpenSystem,
    t_grid: &[f64],
    seed: u64,
    opts: &IntegratorOptions,
) -> Result<McwfOutcome, DynamicsError> {
    let span = (
        t_grid.first().copied().unwrap_or(0.0),
        t_grid.last().copied().unwrap_or(0.0),
    );
    let mut runner = TrajectoryRunner::new(system, opts, span);
    let mut rng = trajectory_rng(seed, 0);
    runner.run(psi0, t_grid, &mut rng, |_, _, _| {})
}

/// Trajectory-averaged expectation values and their standard errors.
#[derive(Clone, Debug)]
pub struct EnsembleAverage {
    pub times: Vec<f64>,
    /// mean[observable][time]
    pub mean: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
    pub records: Vec<EmissionRecord>,
    pub trajectories: usize,
}

/// Runs `n` trajectories (trajectory i uses stream i of `seed`) and averages
/// ⟨ψ|O|ψ⟩/⟨ψ|ψ⟩ for each observable at each grid time. `initial(i, rng)`
/// supplies the starting state of trajectory i.
pub fn mcwf_ensemble<F>(
    system: &OpenSystem,
    t_grid: &[f64],
    observables: &[Operator],
    n: usize,
    seed: u64,
    opts: &IntegratorOptions,
    initial: F,
) -> Result<EnsembleAverage, DynamicsError>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Vec<C64> + Sync,
{
    check_grid(t_grid)?;
    let span = (
        t_grid.first().copied().unwrap_or(0.0),
        t_grid.last().copied().unwrap_or(0.0),
    );
    let n_obs = observables.len();
    let n_t = t_grid.len();
    let per_traj: Vec<Result<(Vec<f64>, EmissionRecord), DynamicsError>> = (0..n)
        .into_par_iter()
        .map_init(
            || TrajectoryRunner::new(system, opts, span),
            |runner, i| {
                let mut rng = trajectory_rng(seed, i as u64);
                let psi0 = initial(i, &mut rng);
                let mut values = vec![0.0; n_obs * n_t];
                let outcome = runner.run(&psi0, t_grid, &mut rng, |k, psi, nsq| {
                    for (o, op) in observables.iter().enumerate() {
                        values[o * n_t + k] = op.expectation(psi).re / nsq;
                    }
                })?;
                Ok((values, outcome.record))
            },
        )
        .collect();

    let mut sum = vec![0.0; n_obs * n_t];
    let mut sum_sq = vec![0.0; n_obs * n_t];
    let mut records = Vec::with_capacity(n);
    for r in per_traj {
        let (values, record) = r?;
        for (k, v) in values.iter().enumerate() {
            sum[k] += v;
            sum_sq[k] += v * v;
        }
        records.push(record);
    }
    let nf = n as f64;
    let mut mean = vec![vec![0.0; n_t]; n_obs];
    let mut std_error = vec![vec![0.0; n_t]; n_obs];
    for o in 0..n_obs {
        for k in 0..n_t {
            let m = sum[o * n_t + k] / nf;
            let var = if n > 1 {
                ((sum_sq[o * n_t + k] - nf * m * m) / (nf - 1.0)).max(0.0)
            } else {
                0.0
            };
            mean[o][k] = m;
            std_error[o][k] = (var / nf).sqrt();
        }
    }
    Ok(EnsembleAverage {
        times: t_grid.to_vec(),
        mean,
        std_error,
        records,
        trajectories: n,
    })
}
