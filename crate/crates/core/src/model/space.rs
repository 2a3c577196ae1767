//! atom ⊗ cavity(σ⁺) ⊗ cavity(σ⁻) product space.

use num_complex::Complex64 as C64;

use crate::error::{invalid, ModelError};
use crate::model::cavity::CavityConfig;
use crate::model::levels::LevelScheme;
use crate::model::operator::Operator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub atom: usize,
    pub n_plus: usize,
    pub n_minus: usize,
}

/// Flat index = (atom · (n_max+1) + n_plus) · (n_max+1) + n_minus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompositeSpace {
    n_atom: usize,
    n_fock: usize,
}

impl CompositeSpace {
    pub fn new(n_atom: usize, n_max: usize) -> Result<Self, ModelError> {
        if n_atom == 0 {
            return Err(invalid("levels", "scheme has no levels"));
        }
        if n_max < 1 {
            return Err(invalid("n_max", "must be >= 1"));
        }
        Ok(Self {
            n_atom,
            n_fock: n_max + 1,
        })
    }

    pub fn build(scheme: &LevelScheme, cavity: &CavityConfig) -> Result<Self, ModelError> {
        Self::new(scheme.len(), cavity.n_max)
    }

    pub fn dim(&self) -> usize {
        self.n_atom * self.n_fock * self.n_fock
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_atom, self.n_fock, self.n_fock)
    }

    pub fn n_max(&self) -> usize {
        self.n_fock - 1
    }

    pub fn n_atom(&self) -> usize {
        self.n_atom
    }

    pub fn index(&self, s: BasisState) -> usize {
        debug_assert!(s.atom < self.n_atom && s.n_plus < self.n_fock && s.n_minus < self.n_fock);
        (s.atom * self.n_fock + s.n_plus) * self.n_fock + s.n_minus
    }

    pub fn state(&self, index: usize) -> BasisState {
        debug_assert!(index < self.dim());
        BasisState {
            n_minus: index % self.n_fock,
            n_plus: (index / self.n_fock) % self.n_fock,
            atom: index / (self.n_fock * self.n_fock),
        }
    }

    pub fn basis(&self) -> impl Iterator<Item = BasisState> + '_ {
        (0..self.dim()).map(move |i| self.state(i))
    }

    /// Unit vector for an atomic level with empty cavity.
    pub fn ket(&self, atom: usize, n_plus: usize, n_minus: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[self.index(BasisState { atom, n_plus, n_minus })] = C64::new(1.0, 0.0);
        v
    }

    fn map_basis<F>(&self, f: F) -> Operator
    where
        F: Fn(BasisState) -> Option<(BasisState, f64)>,
    {
        Operator::from_triplets(
            self.dim(),
            self.basis()
                .filter_map(|s| f(s).map(|(t, v)| (self.index(t), self.index(s), C64::new(v, 0.0)))),
        )
    }

    /// a₊ ⊗ identity elsewhere.
    pub fn a_plus(&self) -> Operator {
        self.map_basis(|s| {
            (s.n_plus > 0).then(|| {
                (
                    BasisState {
                        n_plus: s.n_plus - 1,
                        ..s
                    },
                    (s.n_plus as f64).sqrt(),
                )
            })
        })
    }

    /// a₋ ⊗ identity elsewhere.
    pub fn a_minus(&self) -> Operator {
        self.map_basis(|s| {
            (s.n_minus > 0).then(|| {
                (
                    BasisState {
                        n_minus: s.n_minus - 1,
                        ..s
                    },
                    (s.n_minus as f64).sqrt(),
                )
            })
        })
    }

    /// |to⟩⟨from| on the atom, identity on both modes.
    pub fn atom_transition(&self, to: usize, from: usize) -> Operator {
        self.map_basis(|s| (s.atom == from).then_some((BasisState { atom: to, ..s }, 1.0)))
    }

    pub fn atom_projector(&self, level: usize) -> Operator {
        self.atom_transition(level, level)
    }

    pub fn number_plus(&self) -> Operator {
        self.map_basis(|s| (s.n_plus > 0).then_some((s, s.n_plus as f64)))
    }

    pub fn number_minus(&self) -> Operator {
        self.map_basis(|s| (s.n_minus > 0).then_some((s, s.n_minus as f64)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dimensions() {
        assert_eq!(CompositeSpace::new(4, 1).unwrap().dim(), 16);
        assert_eq!(CompositeSpace::new(5, 1).unwrap().dim(), 20);
        assert_eq!(CompositeSpace::new(4, 2).unwrap().dim(), 36);
        assert!(CompositeSpace::new(4, 0).is_err());
        assert!(CompositeSpace::new(0, 2).is_err());
    }

    #[test]
    fn ordering_is_atom_slowest() {
        let s = CompositeSpace::new(3, 2).unwrap();
        assert_eq!(
            s.index(BasisState {
                atom: 0,
                n_plus: 0,
                n_minus: 1
            }),
            1
        );
        assert_eq!(
            s.index(BasisState {
                atom: 0,
                n_plus: 1,
                n_minus: 0
            }),
            3
        );
        assert_eq!(
            s.index(BasisState {
                atom: 1,
                n_plus: 0,
                n_minus: 0
            }),
            9
        );
    }

    #[test]
    fn ladder_operators() {
        let s = CompositeSpace::new(2, 2).unwrap();
        let a = s.a_plus();
        let n = a.adjoint().matmul(&a);
        let diff = n.add(&s.number_plus().scale(C64::new(-1.0, 0.0)));
        assert!(diff.max_abs() < 1e-14);
        let psi = s.ket(1, 2, 1);
        let mut out = vec![C64::new(0.0, 0.0); s.dim()];
        a.apply(&psi, &mut out);
        let target = s.index(BasisState {
            atom: 1,
            n_plus: 1,
            n_minus: 1,
        });
        assert!((out[target].re - 2f64.sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn index_roundtrip(n_atom in 1usize..7, n_max in 1usize..4, seed in 0usize..10_000) {
            let s = CompositeSpace::new(n_atom, n_max).unwrap();
            let i = seed % s.dim();
            prop_assert_eq!(s.index(s.state(i)), i);
            let b = s.state(i);
            prop_assert!(b.atom < n_atom && b.n_plus <= n_max && b.n_minus <= n_max);
        }
    }
}
