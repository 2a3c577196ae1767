use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::DynamicsError;
use crate::model::operator::Operator;

/// Density matrix stored row-major, with the time it refers to.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    dim: usize,
    data: Vec<C64>,
    pub time: f64,
}

impl DensityState {
    pub fn from_matrix(dim: usize, data: Vec<C64>, time: f64) -> Result<Self, DynamicsError> {
        if data.len() != dim * dim {
            return Err(DynamicsError::Dimension {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data, time })
    }

    /// |ψ⟩⟨ψ| for a normalized ψ.
    pub fn pure(psi: &[C64], time: f64) -> Self {
        Self::mixture(&[(psi.to_vec(), 1.0)], time)
    }

    /// Σ p_k |ψ_k⟩⟨ψ_k|.
    pub fn mixture(components: &[(Vec<C64>, f64)], time: f64) -> Self {
        let dim = components.first().map_or(0, |c| c.0.len());
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for (psi, p) in components {
            assert_eq!(psi.len(), dim, "mixture components differ in dimension");
            for i in 0..dim {
                if psi[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..dim {
                    data[i * dim + j] += *p * psi[i] * psi[j].conj();
                }
            }
        }
        Self { dim, data, time }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// tr(O ρ).
    pub fn expectation(&self, op: &Operator) -> C64 {
        trace_product(op, &self.data, self.dim)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim;
        // nalgebra is column-major; symmetrize to absorb roundoff.
        let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i).conj()));
        SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Trace 1 within 1e−8, Hermitian within 1e−10, eigenvalues ≥ −1e−8.
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(DynamicsError::InitialState(format!("trace {tr} is not 1")));
        }
        let h = self.hermiticity_residual();
        if h > 1e-10 {
            return Err(DynamicsError::InitialState(format!("not Hermitian (residual {h:e})")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-8 {
            return Err(DynamicsError::InitialState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

/// tr(O X) for a dense row-major X.
pub(crate) fn trace_product(op: &Operator, x: &[C64], dim: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (r, c, v) in op.entries() {
        acc += v * x[c * dim + r];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_state_properties() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = vec![C64::new(s, 0.0), C64::new(0.0, s)];
        let rho = DensityState::pure(&psi, 0.0);
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert!(rho.hermiticity_residual() < 1e-15);
        assert!(rho.min_eigenvalue().abs() < 1e-12);
        assert!(rho.validate().is_ok());
        let sy = Operator::from_triplets(2, vec![(0, 1, C64::new(0.0, -1.0)), (1, 0, C64::new(0.0, 1.0))]);
        assert!((rho.expectation(&sy).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_states_rejected() {
        let rho = DensityState::from_matrix(
            2,
            vec![
                C64::new(1.5, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(-0.5, 0.0),
            ],
            0.0,
        )
        .unwrap();
        assert!(rho.validate().is_err());
        assert!(DensityState::from_matrix(2, vec![C64::new(1.0, 0.0)], 0.0).is_err());
    }
}
