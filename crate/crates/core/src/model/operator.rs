//! Sparse complex operators in compressed-row form.

use num_complex::Complex64 as C64;

/// Square sparse complex matrix stored row-compressed.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))))
    }

    /// Builds an operator from `(row, col, value)` triplets. Duplicates are
    /// summed and exact zeros dropped.
    ///
    /// Panics if an index is out of range.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, _) in &t {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside dimension {dim}");
        }
        t.sort_by_key(|a| (a.0, a.1));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != C64::new(0.0, 0.0));

        let mut row_ptr = vec![0; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            col_idx: merged.iter().map(|e| e.1).collect(),
            values: merged.iter().map(|e| e.2).collect(),
        }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        Self::from_triplets(values.len(), values.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Iterates over stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    #[inline]
    pub(crate) fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.entries().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_triplets(self.dim, self.entries().map(|(r, c, v)| (r, c, v * factor)))
    }

    pub fn add(&self, other: &Operator) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        Self::from_triplets(self.dim, self.entries().chain(other.entries()))
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Operator) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (&k, &a) in cols.iter().zip(vals) {
                let (cols2, vals2) = other.row(k);
                for (&c, &b) in cols2.iter().zip(vals2) {
                    triplets.push((r, c, a * b));
                }
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            let mut acc = C64::new(0.0, 0.0);
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            *out = acc;
        }
    }

    /// `y += alpha A x`.
    #[inline]
    pub fn apply_add(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            let mut acc = C64::new(0.0, 0.0);
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            *out += alpha * acc;
        }
    }

    /// ⟨ψ|A|ψ⟩ for an unnormalized vector.
    pub fn expectation(&self, psi: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            let mut row_acc = C64::new(0.0, 0.0);
            for (&c, &v) in cols.iter().zip(vals) {
                row_acc += v * psi[c];
            }
            acc += psi[r].conj() * row_acc;
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// max |A - A†| over all entries.
    pub fn hermiticity_residual(&self) -> f64 {
        let adj = self.adjoint();
        let diff = self.add(&adj.scale(C64::new(-1.0, 0.0)));
        diff.max_abs()
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim * self.dim];
        for (r, c, v) in self.entries() {
            out[r * self.dim + c] = v;
        }
        out
    }

    /// Upper bound on the spectral norm: sqrt(‖A‖₁ ‖A‖∞).
    pub fn norm_bound(&self) -> f64 {
        let mut col_sums = vec![0.0; self.dim];
        let mut row_max: f64 = 0.0;
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            let mut s = 0.0;
            for (&c, v) in cols.iter().zip(vals) {
                s += v.norm();
                col_sums[c] += v.norm();
            }
            row_max = row_max.max(s);
        }
        let col_max = col_sums.into_iter().fold(0.0, f64::max);
        (row_max * col_max).sqrt()
    }
}
