//! Two-time first-order correlations by the quantum regression theorem.
//!
//! For t₂ ≥ t₁: G(t₁, t₂) = ⟨a†(t₂) a(t₁)⟩ = tr[a† Λ(t₂)] with Λ(t₁) = a ρ(t₁)
//! propagated by the same Liouvillian as ρ. For t₁ > t₂ the independent
//! route tr[a Λ'(t₁)] with Λ'(t₂) = ρ(t₂) a† is available.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::density::{trace_product, DensityState};
use crate::dynamics::integrator::{check_grid, IntegratorOptions};
use crate::dynamics::master::{evolve_master, LiouvillePropagator};
use crate::dynamics::system::OpenSystem;
use crate::error::DynamicsError;
use crate::model::operator::Operator;

/// G⁽¹⁾(t₁, t₂) on a square time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSurface {
    times: Vec<f64>,
    /// values[i1 * n + i2] = G(t_i1, t_i2)
    values: Vec<C64>,
}

/// How the t₁ > t₂ half of a surface is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerTriangle {
    /// Filled from G(t₁,t₂) = conj G(t₂,t₁).
    Conjugate,
    /// Propagated separately from ρ(t₂) a†.
    Propagated,
}

impl CorrelationSurface {
    pub fn new(times: Vec<f64>, values: Vec<C64>) -> Result<Self, DynamicsError> {
        if values.len() != times.len() * times.len() {
            return Err(DynamicsError::Dimension {
                expected: times.len() * times.len(),
                found: values.len(),
            });
        }
        check_grid(&times)?;
        Ok(Self { times, values })
    }

    /// Surface of a pure single-photon wavepacket with amplitude ξ(t):
    /// G(t₁, t₂) = conj(ξ(t₂)) ξ(t₁).
    pub fn from_wavepacket<F: Fn(f64) -> C64>(times: Vec<f64>, xi: F) -> Result<Self, DynamicsError> {
        let amp: Vec<C64> = times.iter().map(|&t| xi(t)).collect();
        let n = times.len();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(amp[j].conj() * amp[i]);
            }
        }
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    #[inline]
    pub fn get(&self, i1: usize, i2: usize) -> C64 {
        self.values[i1 * self.times.len() + i2]
    }

    /// Diagonal G(t, t), the intensity.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(i, i).re).collect()
    }

    /// max |G(t₁,t₂) − conj G(t₂,t₁)|.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Trapezoidal ∫ G(t, t) dt.
    pub fn integrated_intensity(&self) -> f64 {
        let d = self.diagonal();
        self.times
            .windows(2)
            .zip(d.windows(2))
            .map(|(t, g)| 0.5 * (t[1] - t[0]) * (g[0] + g[1]))
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// One row of G: G(t₁, t₂) for each t₂ in `t2_grid`, with t₁ = `rho_t1.time`.
pub fn two_time_correlation(
    rho_t1: &DensityState,
    system: &OpenSystem,
    field: &Operator,
    t2_grid: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<C64>, DynamicsError> {
    check_grid(t2_grid)?;
    if t2_grid.first().is_some_and(|&t| t < rho_t1.time) {
        return Err(DynamicsError::TimeGrid(0));
    }
    let dim = system.dim();
    let lambda = left_multiply(field, rho_t1.data(), dim);
    let field_dag = field.adjoint();
    propagate_row(system, lambda, rho_t1.time, t2_grid, &field_dag, opts)
}

fn propagate_row(
    system: &OpenSystem,
    mut lambda: Vec<C64>,
    t_start: f64,
    grid: &[f64],
    readout: &Operator,
    opts: &IntegratorOptions,
) -> Result<Vec<C64>, DynamicsError> {
    let dim = system.dim();
    let Some(&t_end) = grid.last() else {
        return Ok(Vec::new());
    };
    let mut prop = LiouvillePropagator::new(system, false, opts, t_start, t_end);
    let mut t = t_start;
    let mut row = Vec::with_capacity(grid.len());
    for &target in grid {
        prop.advance(&mut lambda, t, target)?;
        t = target;
        row.push(trace_product(readout, &lambda, dim));
    }
    Ok(row)
}

/// A · X for dense row-major X.
fn left_multiply(a: &Operator, x: &[C64], dim: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    for (r, c, v) in a.entries() {
        for j in 0..dim {
            out[r * dim + j] += v * x[c * dim + j];
        }
    }
    out
}

/// X · A for dense row-major X.
fn right_multiply(x: &[C64], a: &Operator, dim: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    for (r, c, v) in a.entries() {
        for i in 0..dim {
            out[i * dim + c] += x[i * dim + r] * v;
        }
    }
    out
}

/// Full surface G(t₁, t₂) on `grid`, starting from `rho0` at or before the
/// first grid time.
pub fn correlation_surface(
    rho0: &DensityState,
    system: &OpenSystem,
    field: &Operator,
    grid: &[f64],
    opts: &IntegratorOptions,
    lower: LowerTriangle,
) -> Result<CorrelationSurface, DynamicsError> {
    let states = evolve_master(rho0, system, grid, opts)?;
    let n = grid.len();
    let dim = system.dim();
    let field_dag = field.adjoint();

    let upper: Vec<Result<Vec<C64>, DynamicsError>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let lambda = left_multiply(field, states[i].data(), dim);
            propagate_row(system, lambda, grid[i], &grid[i..], &field_dag, opts)
        })
        .collect();
    let mut values = vec![C64::new(0.0, 0.0); n * n];
    for (i, row) in upper.into_iter().enumerate() {
        for (k, v) in row?.into_iter().enumerate() {
            values[i * n + i + k] = v;
        }
    }
    match lower {
        LowerTriangle::Conjugate => {
            for i in 0..n {
                for j in 0..i {
                    values[i * n + j] = values[j * n + i].conj();
                }
            }
        }
        LowerTriangle::Propagated => {
            let cols: Vec<Result<Vec<C64>, DynamicsError>> = (0..n)
                .into_par_iter()
                .map(|j| {
                    let lambda = right_multiply(states[j].data(), &field_dag, dim);
                    propagate_row(system, lambda, grid[j], &grid[j..], field, opts)
                })
                .collect();
            for (j, col) in cols.into_iter().enumerate() {
                for (k, v) in col?.into_iter().enumerate().skip(1) {
                    values[(j + k) * n + j] = v;
                }
            }
        }
    }
    CorrelationSurface::new(grid.to_vec(), values)
}
