//! Dense reference solver for small pencils.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fem::SparseOperator;

/// All positive eigenvalues of `K U = lambda G U` with `K`-normalized
/// vectors, ascending. Uses `K = L L^T` and the symmetric matrix
/// `L^{-1} G L^{-T}`, whose eigenvalues are `1 / lambda`.
pub fn dense_pencil(k: &SparseOperator, g: &SparseOperator) -> Result<Vec<(f64, Vec<f64>)>> {
    let kd = k.to_dense();
    let gd = g.to_dense();
    let n = kd.nrows();
    let chol = Cholesky::new(kd).ok_or(Error::IndefiniteMatrix { pivot: 0 })?;
    let l = chol.l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or(Error::IndefiniteMatrix { pivot: 0 })?;
    let c = &linv * gd * linv.transpose();
    let c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out: Vec<(f64, Vec<f64>)> = (0..n)
        .filter(|&j| eig.eigenvalues[j] > 1e-12 * scale)
        .map(|j| {
            // U = L^{-T} y has U^T K U = y^T y = 1
            let y = eig.eigenvectors.column(j).into_owned();
            let u = linv.transpose() * y;
            (1.0 / eig.eigenvalues[j], u.iter().copied().collect())
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}
