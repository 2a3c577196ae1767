use num_complex::Complex64 as C64;

use crate::model::hamiltonian::{Coefficient, CollapseOperator, TimeDependentOperator};
use crate::model::operator::Operator;

/// Time-dependent Hamiltonian plus jump operators, with the non-Hermitian
/// generator K(t) = −i H(t) − ½ Σ C†C precomputed.
#[derive(Clone, Debug)]
pub struct OpenSystem {
    hamiltonian: TimeDependentOperator,
    collapse: Vec<CollapseOperator>,
    generator: TimeDependentOperator,
    compiled: CompiledOperator,
}

impl OpenSystem {
    pub fn new(hamiltonian: TimeDependentOperator, collapse: Vec<CollapseOperator>) -> Self {
        let dim = hamiltonian.dim();
        for c in &collapse {
            assert_eq!(c.op.dim(), dim, "collapse operator dimension mismatch");
        }
        let minus_i = C64::new(0.0, -1.0);
        let mut generator = TimeDependentOperator::new(dim);
        for (op, coeff) in hamiltonian.terms() {
            generator.push(op.scale(minus_i), coeff.clone());
        }
        let mut jump_sum = Operator::zeros(dim);
        for c in &collapse {
            jump_sum = jump_sum.add(&c.op.adjoint().matmul(&c.op));
        }
        generator.push(
            jump_sum.scale(C64::new(-0.5, 0.0)),
            Coefficient::Constant(C64::new(1.0, 0.0)),
        );
        let generator = generator.simplified();
        Self {
            compiled: CompiledOperator::new(&generator),
            hamiltonian,
            collapse,
            generator,
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &TimeDependentOperator {
        &self.hamiltonian
    }

    pub fn collapse(&self) -> &[CollapseOperator] {
        &self.collapse
    }

    /// K(t) = −i H_eff(t).
    pub fn generator(&self) -> &TimeDependentOperator {
        &self.generator
    }

    pub(crate) fn compiled(&self) -> &CompiledOperator {
        &self.compiled
    }

    /// Bound on ‖K(t)‖ over the given sample times.
    pub fn generator_norm_bound(&self, sample_times: &[f64]) -> f64 {
        self.generator.norm_bound(sample_times)
    }
}

/// All terms of a [`TimeDependentOperator`] on one merged sparsity pattern,
/// so that A(t) is assembled once per coefficient set and applied in a
/// single pass.
#[derive(Clone, Debug)]
pub(crate) struct CompiledOperator {
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    /// Per term: (position in the merged pattern, value).
    terms: Vec<Vec<(u32, C64)>>,
}

impl CompiledOperator {
    pub fn new(op: &TimeDependentOperator) -> Self {
        let dim = op.dim();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); dim];
        for (term, _) in op.terms() {
            for (r, c, _) in term.entries() {
                rows[r].push(c);
            }
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            col_idx.extend(row.iter().map(|&c| c as u32));
            row_ptr.push(col_idx.len());
        }
        let terms = op
            .terms()
            .iter()
            .map(|(term, _)| {
                term.entries()
                    .map(|(r, c, v)| {
                        let start = row_ptr[r];
                        let k = rows[r].binary_search(&c).expect("entry in merged pattern");
                        ((start + k) as u32, v)
                    })
                    .collect()
            })
            .collect();
        Self {
            row_ptr,
            col_idx,
            terms,
        }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// values = Σ_k coeffs[k] · term_k on the merged pattern.
    pub fn assemble(&self, coeffs: &[C64], values: &mut Vec<C64>) {
        values.clear();
        values.resize(self.nnz(), C64::new(0.0, 0.0));
        for (entries, &c) in self.terms.iter().zip(coeffs) {
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            for &(k, v) in entries {
                // k < nnz by construction
                unsafe { *values.get_unchecked_mut(k as usize) += c * v };
            }
        }
    }

    /// Y = A X for row-major X with `m` columns; Y is overwritten.
    pub fn apply_dense(&self, values: &[C64], x: &[C64], m: usize, y: &mut [C64]) {
        let rows = self.row_ptr.len() - 1;
        assert!(values.len() == self.nnz() && x.len() == rows * m && y.len() == x.len());
        for r in 0..rows {
            let dst = &mut y[r * m..(r + 1) * m];
            dst.fill(C64::new(0.0, 0.0));
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            for (&a, &c) in values[span.clone()].iter().zip(&self.col_idx[span]) {
                let c = c as usize;
                for (d, s) in dst.iter_mut().zip(&x[c * m..(c + 1) * m]) {
                    *d += a * s;
                }
            }
        }
    }

    /// y = A x with A given by [`assemble`](Self::assemble).
    #[inline]
    pub fn apply(&self, values: &[C64], x: &[C64], y: &mut [C64]) {
        assert!(values.len() == self.nnz() && x.len() + 1 == self.row_ptr.len() && y.len() == x.len());
        for (r, out) in y.iter_mut().enumerate() {
            let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let (mut re, mut im) = (0.0, 0.0);
            for k in a..b {
                // Column indices and row pointers were validated in `new`.
                let (v, xc) = unsafe {
                    (
                        *values.get_unchecked(k),
                        *x.get_unchecked(*self.col_idx.get_unchecked(k) as usize),
                    )
                };
                re += v.re * xc.re - v.im * xc.im;
                im += v.re * xc.im + v.im * xc.re;
            }
            *out = C64::new(re, im);
        }
    }
}
