//! Lindblad master equation
//! dρ/dt = −i[H(t), ρ] + Σ_k (C_k ρ C_k† − ½{C_k†C_k, ρ}).

use num_complex::Complex64 as C64;

use crate::dynamics::density::DensityState;
use crate::dynamics::integrator::{check_grid, IntegratorOptions, Rhs, Stepper};
use crate::dynamics::system::OpenSystem;
use crate::error::DynamicsError;
use crate::model::hamiltonian::CollapseOperator;

type Entries = Vec<(usize, usize, C64)>;

/// L(X) = K X + X K† + Σ C X C† on row-major dense X.
pub(crate) struct LindbladRhs<'a> {
    system: &'a OpenSystem,
    dim: usize,
    /// Σ C X C† as (index into L(X), index into X, weight).
    jump_pairs: Vec<(u32, u32, C64)>,
    /// X is Hermitian: use L(X) = Y + Y† + Σ C X C† with Y = K X.
    hermitian: bool,
    values: Vec<C64>,
    assembled_for: Vec<C64>,
    adj: Vec<C64>,
    work: Vec<C64>,
}

/// Channels that differ only by a scale factor (output and loss ports of
/// one mode) act identically on ρ; merge them.
fn merged_jumps(collapse: &[CollapseOperator]) -> Vec<Entries> {
    let mut groups: Vec<(Entries, f64)> = Vec::new();
    for c in collapse {
        let entries: Entries = c.op.entries().collect();
        let Some(&(_, _, scale)) = entries.first() else {
            continue;
        };
        let unit: Entries = entries.iter().map(|&(r, k, v)| (r, k, v / scale)).collect();
        let same = |g: &Entries| {
            g.len() == unit.len()
                && g.iter()
                    .zip(&unit)
                    .all(|(a, b)| a.0 == b.0 && a.1 == b.1 && (a.2 - b.2).norm() <= 1e-12 * a.2.norm())
        };
        match groups.iter_mut().find(|(g, _)| same(g)) {
            Some(g) => g.1 += scale.norm_sqr(),
            None => groups.push((unit, scale.norm_sqr())),
        }
    }
    groups
        .into_iter()
        .map(|(u, w)| u.into_iter().map(|(r, k, v)| (r, k, v * w.sqrt())).collect())
        .collect()
}

impl<'a> LindbladRhs<'a> {
    pub fn new(system: &'a OpenSystem, hermitian: bool) -> Self {
        let n = system.dim();
        let mut jump_pairs = Vec::new();
        for entries in merged_jumps(system.collapse()) {
            for &(i, k, a) in &entries {
                for &(j, l, b) in &entries {
                    jump_pairs.push(((i * n + j) as u32, (k * n + l) as u32, a * b.conj()));
                }
            }
        }
        jump_pairs.sort_by_key(|p| (p.0, p.1));
        Self {
            system,
            dim: n,
            jump_pairs,
            hermitian,
            values: Vec::new(),
            assembled_for: Vec::new(),
            adj: vec![C64::new(0.0, 0.0); n * n],
            work: vec![C64::new(0.0, 0.0); n * n],
        }
    }
}

impl Rhs for LindbladRhs<'_> {
    fn len(&self) -> usize {
        self.dim * self.dim
    }

    fn coefficients(&self, t: f64, buf: &mut Vec<C64>) {
        self.system.generator().coefficients_into(t, buf);
    }

    fn eval(&mut self, coeffs: &[C64], x: &[C64], out: &mut [C64]) {
        let n = self.dim;
        let compiled = self.system.compiled();
        if self.assembled_for.as_slice() != coeffs || self.values.is_empty() {
            compiled.assemble(coeffs, &mut self.values);
            self.assembled_for.clear();
            self.assembled_for.extend_from_slice(coeffs);
        }
        compiled.apply_dense(&self.values, x, n, out);
        if self.hermitian {
            for i in 0..n {
                let d = out[i * n + i];
                out[i * n + i] = d + d.conj();
                for j in (i + 1)..n {
                    let a = out[i * n + j];
                    let b = out[j * n + i];
                    out[i * n + j] = a + b.conj();
                    out[j * n + i] = b + a.conj();
                }
            }
        } else {
            // X K† = (K X†)†
            for i in 0..n {
                for j in 0..n {
                    self.adj[i * n + j] = x[j * n + i].conj();
                }
            }
            compiled.apply_dense(&self.values, &self.adj, n, &mut self.work);
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += self.work[j * n + i].conj();
                }
            }
        }
        for &(o, s, w) in &self.jump_pairs {
            out[o as usize] += w * x[s as usize];
        }
    }
}

fn trace_drift(dim: usize) -> impl Fn(&[C64], &[C64]) -> f64 {
    move |before, after| {
        let tr = |x: &[C64]| (0..dim).map(|i| x[i * dim + i]).sum::<C64>();
        (tr(after) - tr(before)).norm()
    }
}

/// Propagates a (possibly non-Hermitian) operator under the Liouvillian.
pub(crate) struct LiouvillePropagator<'a> {
    stepper: Stepper<LindbladRhs<'a>>,
    dim: usize,
}

impl<'a> LiouvillePropagator<'a> {
    pub fn new(system: &'a OpenSystem, hermitian: bool, opts: &IntegratorOptions, t0: f64, t1: f64) -> Self {
        let nominal = opts.nominal_step(system, t0, t1);
        Self {
            stepper: Stepper::new(LindbladRhs::new(system, hermitian), opts.clone(), nominal),
            dim: system.dim(),
        }
    }

    pub fn advance(&mut self, x: &mut [C64], t0: f64, t1: f64) -> Result<(), DynamicsError> {
        let drift = trace_drift(self.dim);
        self.stepper.advance(x, t0, t1, &drift)
    }
}

/// Integrates the master equation from `rho0` and returns ρ at each grid
/// time. Grid times must be strictly increasing and not precede `rho0.time`.
pub fn evolve_master(
    rho0: &DensityState,
    system: &OpenSystem,
    t_grid: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<DensityState>, DynamicsError> {
    check_grid(t_grid)?;
    if rho0.dim() != system.dim() {
        return Err(DynamicsError::Dimension {
            expected: system.dim(),
            found: rho0.dim(),
        });
    }
    rho0.validate()?;
    let Some(&t_end) = t_grid.last() else {
        return Ok(Vec::new());
    };
    if t_grid[0] < rho0.time {
        return Err(DynamicsError::TimeGrid(0));
    }
    let mut prop = LiouvillePropagator::new(system, true, opts, rho0.time, t_end);
    let mut x = rho0.data().to_vec();
    let mut t = rho0.time;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        prop.advance(&mut x, t, target)?;
        t = target;
        out.push(DensityState::from_matrix(system.dim(), x.clone(), t)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hamiltonian::{Channel, TimeDependentOperator};
    use crate::model::operator::Operator;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn two_level_decay() {
        // |e⟩ = 1 decays to |g⟩ = 0 at rate Γ
        let gamma: f64 = 2.0;
        let h = TimeDependentOperator::constant(Operator::zeros(2));
        let jump = Operator::from_triplets(2, vec![(0, 1, c(gamma.sqrt()))]);
        let sys = OpenSystem::new(
            h,
            vec![CollapseOperator {
                channel: Channel::OutputPlus,
                rate: gamma,
                op: jump,
            }],
        );
        let rho0 = DensityState::pure(&[c(0.0), c(1.0)], 0.0);
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.2).collect();
        let out = evolve_master(&rho0, &sys, &grid, &IntegratorOptions::fixed(1e-3)).unwrap();
        for s in &out {
            assert!((s.get(1, 1).re - (-gamma * s.time).exp()).abs() < 1e-10);
            assert!((s.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn proportional_channels_merge() {
        let (g1, g2): (f64, f64) = (1.5, 0.5);
        let lower = |g: f64| Operator::from_triplets(2, vec![(0, 1, c(g.sqrt()))]);
        let sys = OpenSystem::new(
            TimeDependentOperator::constant(Operator::zeros(2)),
            vec![
                CollapseOperator {
                    channel: Channel::OutputPlus,
                    rate: g1,
                    op: lower(g1),
                },
                CollapseOperator {
                    channel: Channel::LossPlus,
                    rate: g2,
                    op: lower(g2),
                },
            ],
        );
        assert_eq!(merged_jumps(sys.collapse()).len(), 1);
        let rho0 = DensityState::pure(&[c(0.0), c(1.0)], 0.0);
        let out = evolve_master(&rho0, &sys, &[1.0], &IntegratorOptions::fixed(1e-3)).unwrap();
        assert!((out[0].get(1, 1).re - (-(g1 + g2)).exp()).abs() < 1e-10);
        assert!((out[0].get(0, 0).re - (1.0 - (-(g1 + g2)).exp())).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_grid() {
        let sys = OpenSystem::new(TimeDependentOperator::constant(Operator::zeros(1)), vec![]);
        let rho0 = DensityState::pure(&[c(1.0)], 0.0);
        let opts = IntegratorOptions::default();
        assert!(evolve_master(&rho0, &sys, &[0.0, 0.0], &opts).is_err());
        let rho1 = DensityState::pure(&[c(1.0)], 1.0);
        assert!(evolve_master(&rho1, &sys, &[0.5], &opts).is_err());
    }
}
