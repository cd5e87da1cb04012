//! Sparse Cholesky factorization of SPD operators.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::linalg::LltError;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::fem::SparseOperator;

/// Reusable `L L^T` factorization.
#[derive(Debug)]
pub struct Factorization {
    n: usize,
    llt: Llt<usize, f64>,
}

/// Factors a symmetric positive definite operator. Only the lower triangle
/// is read.
pub fn factor_spd(a: &SparseOperator) -> Result<Factorization> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::Assembly(format!("cannot factor a {}x{} operator", n, a.n_cols())));
    }
    let mut triplets = Vec::with_capacity(a.nnz() / 2 + n);
    for r in 0..n {
        for (c, v) in a.row(r) {
            if c <= r {
                triplets.push(Triplet::new(r, c, v));
            }
        }
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Assembly(format!("sparse matrix construction failed: {e:?}")))?;
    let llt = mat.sp_cholesky(Side::Lower).map_err(|e| match e {
        LltError::Numeric(faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index }) => {
            Error::IndefiniteMatrix { pivot: index }
        }
        LltError::Generic(g) => Error::Assembly(format!("factorization failed: {g:?}")),
    })?;
    Ok(Factorization { n, llt })
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let rhs = Mat::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.llt.solve(&rhs);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    /// Solves for several right-hand sides at once.
    pub fn solve_many(&self, bs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        if bs.is_empty() {
            return Vec::new();
        }
        let rhs = Mat::from_fn(self.n, bs.len(), |i, j| bs[j][i]);
        let x = self.llt.solve(&rhs);
        (0..bs.len()).map(|j| (0..self.n).map(|i| x[(i, j)]).collect()).collect()
    }
}
