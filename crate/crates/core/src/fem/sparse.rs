//! Compressed-row sparse operators, deterministic block assembly and
//! elimination of constrained DOFs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Square dense block attached to a list of global DOFs, row-major.
#[derive(Debug, Clone)]
pub struct LocalBlock {
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
}

impl LocalBlock {
    pub fn zeros(dofs: Vec<usize>) -> Self {
        let n = dofs.len();
        Self {
            dofs,
            values: vec![0.0; n * n],
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let n = self.dofs.len();
        self.values[i * n + j] += v;
    }
}

/// Sparse matrix in compressed row layout. Column indices are sorted within
/// each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseOperator {
    /// Sums blocks into an `n x n` operator. Contributions to one entry are
    /// added in block order, so the result does not depend on scheduling.
    pub fn from_blocks(n: usize, blocks: &[LocalBlock], symmetric: bool) -> Self {
        let mut counts = vec![0usize; n + 1];
        for b in blocks {
            for &r in &b.dofs {
                counts[r + 1] += b.dofs.len();
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); counts[n]];
        for b in blocks {
            let m = b.dofs.len();
            for (i, &r) in b.dofs.iter().enumerate() {
                for (j, &c) in b.dofs.iter().enumerate() {
                    entries[fill[r]] = (c, b.values[i * m + j]);
                    fill[r] += 1;
                }
            }
        }
        Self::from_row_entries(n, n, &counts, entries, symmetric)
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed in
    /// input order.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)], symmetric: bool) -> Self {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(r, c, v) in triplets {
            entries[fill[r]] = (c, v);
            fill[r] += 1;
        }
        Self::from_row_entries(n_rows, n_cols, &counts, entries, symmetric)
    }

    fn from_row_entries(
        n_rows: usize,
        n_cols: usize,
        bounds: &[usize],
        mut entries: Vec<(usize, f64)>,
        symmetric: bool,
    ) -> Self {
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in 0..n_rows {
            let row = &mut entries[bounds[r]..bounds[r + 1]];
            row.sort_by_key(|e| e.0);
            let mut last = usize::MAX;
            for &(c, v) in row.iter() {
                if c == last {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = c;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
            symmetric,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
            symmetric: true,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(i) => self.values[span.start + i],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.apply(x, &mut y);
        y
    }

    /// `x^T A y`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(self.mul(y)).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - A^T|` over stored entries.
    pub fn symmetry_error(&self) -> f64 {
        let mut err = 0.0f64;
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                let t = if c < self.n_rows { self.get(c, r) } else { 0.0 };
                err = err.max((v - t).abs());
            }
        }
        err
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s * other` for operators of equal shape.
    pub fn add_scaled(&self, s: f64, other: &SparseOperator) -> Self {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.n_rows {
            triplets.extend(self.row(r).map(|(c, v)| (r, c, v)));
            triplets.extend(other.row(r).map(|(c, v)| (r, c, s * v)));
        }
        Self::from_triplets(self.n_rows, self.n_cols, &triplets, self.symmetric && other.symmetric)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Split of DOFs into free and constrained sets.
#[derive(Debug, Clone)]
pub struct DofPartition {
    n: usize,
    free: Vec<usize>,
    constrained: Vec<usize>,
    /// Position among the free DOFs, `usize::MAX` when constrained.
    free_index: Vec<usize>,
}

impl DofPartition {
    pub fn new(n: usize, constrained: &[usize]) -> Result<Self> {
        let mut is_fixed = vec![false; n];
        for &d in constrained {
            if d >= n {
                return Err(Error::Assembly(format!("constrained DOF {d} out of range ({n} DOFs)")));
            }
            is_fixed[d] = true;
        }
        let mut free = Vec::new();
        let mut fixed = Vec::new();
        let mut free_index = vec![usize::MAX; n];
        for (d, &f) in is_fixed.iter().enumerate() {
            if f {
                fixed.push(d);
            } else {
                free_index[d] = free.len();
                free.push(d);
            }
        }
        Ok(Self {
            n,
            free,
            constrained: fixed,
            free_index,
        })
    }

    pub fn n_full(&self) -> usize {
        self.n
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn constrained(&self) -> &[usize] {
        &self.constrained
    }

    pub fn reduce(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| full[d]).collect()
    }

    /// Full vector with zeros on constrained DOFs.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&d, &v) in self.free.iter().zip(reduced) {
            out[d] = v;
        }
        out
    }

    /// Free-free block of `a`.
    pub fn restrict(&self, a: &SparseOperator) -> SparseOperator {
        let mut triplets = Vec::with_capacity(a.nnz());
        for (i, &r) in self.free.iter().enumerate() {
            for (c, v) in a.row(r) {
                let j = self.free_index[c];
                if j != usize::MAX {
                    triplets.push((i, j, v));
                }
            }
        }
        SparseOperator::from_triplets(self.n_free(), self.n_free(), &triplets, a.is_symmetric())
    }

    /// Reduced right-hand side `b_f - A_fc g_c` for prescribed values `g`
    /// on the constrained DOFs (entries of `g` on free DOFs are ignored).
    pub fn lift(&self, a: &SparseOperator, b: &[f64], g: &[f64]) -> Vec<f64> {
        self.free
            .iter()
            .map(|&r| {
                let coupling: f64 = a
                    .row(r)
                    .filter(|&(c, _)| self.free_index[c] == usize::MAX)
                    .map(|(c, v)| v * g[c])
                    .sum();
                b[r] - coupling
            })
            .collect()
    }
}
