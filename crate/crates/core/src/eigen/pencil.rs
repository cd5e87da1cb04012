//! Lowest positive eigenpairs of the pencil `K U = lambda G U`.
//!
//! The iteration works with `M = K^{-1} G`, which is self-adjoint in the
//! `K` inner product and has eigenvalues `1 / lambda`. A block Krylov basis
//! of `M` is built from the current Ritz block, Rayleigh-Ritz picks the
//! largest positive values of `1 / lambda`, and the best Ritz vectors seed
//! the next restart.

use log::debug;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::factor::{factor_spd, Factorization};
use crate::error::{Error, Result};
use crate::fem::SparseOperator;

/// Eigenvalue and vector of `K U = lambda_hat G U`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda_hat: f64,
    /// Normalized so that `U^T K U = 1`.
    pub vector: Vec<f64>,
    /// Normwise backward error
    /// `|K U - lambda_hat G U| / ((|K| + |lambda_hat| |G|) |U|)`.
    pub residual_norm: f64,
    /// `|K U - lambda_hat G U| / |K U|`.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_restarts: usize,
    /// Krylov blocks added per restart.
    pub krylov_steps: usize,
    /// Ritz vectors kept beyond the requested count.
    pub guard: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_restarts: 200,
            krylov_steps: 6,
            guard: 3,
            seed: 0x5eed,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// `U / sqrt(U^T K U)`.
pub fn normalize_energy(u: &[f64], k: &SparseOperator) -> Result<Vec<f64>> {
    let e = k.form(u, u);
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::DegenerateVector(e));
    }
    let s = 1.0 / e.sqrt();
    Ok(u.iter().map(|v| v * s).collect())
}

/// Flips `u` so its entry of largest magnitude (first on ties) is positive.
pub fn fix_sign(u: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &v in u.iter() {
        if v.abs() > best * (1.0 + 1e-12) {
            best = v.abs();
            sign = v.signum();
        }
    }
    if sign < 0.0 {
        u.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Krylov basis, K-orthonormal, with cached `K v` and `G v`.
struct Basis<'a> {
    k: &'a SparseOperator,
    g: &'a SparseOperator,
    v: Vec<Vec<f64>>,
    kv: Vec<Vec<f64>>,
    gv: Vec<Vec<f64>>,
}

impl<'a> Basis<'a> {
    fn new(k: &'a SparseOperator, g: &'a SparseOperator) -> Self {
        Self {
            k,
            g,
            v: Vec::new(),
            kv: Vec::new(),
            gv: Vec::new(),
        }
    }

    /// Adds the block after K-orthogonalization; returns the number kept.
    fn extend(&mut self, block: Vec<Vec<f64>>) -> usize {
        let mut added = 0;
        for mut w in block {
            let kw0 = self.k.mul(&w);
            let before = dot(&w, &kw0).max(0.0).sqrt();
            if !(before > 0.0) || !before.is_finite() {
                continue;
            }
            for _ in 0..2 {
                for (v, kv) in self.v.iter().zip(&self.kv) {
                    let c = dot(kv, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let kw = self.k.mul(&w);
            let after = dot(&w, &kw).max(0.0).sqrt();
            if after <= 1e-10 * before {
                continue;
            }
            let s = 1.0 / after;
            w.iter_mut().for_each(|x| *x *= s);
            let gw = self.g.mul(&w);
            self.kv.push(kw.into_iter().map(|x| x * s).collect());
            self.gv.push(gw);
            self.v.push(w);
            added += 1;
        }
        added
    }

    fn len(&self) -> usize {
        self.v.len()
    }

    fn combine(&self, set: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; set[0].len()];
        for (c, v) in y.iter().zip(set) {
            axpy(*c, v, &mut out);
        }
        out
    }
}

struct Ritz {
    theta: f64,
    u: Vec<f64>,
    ku: Vec<f64>,
    gu: Vec<f64>,
}

impl Ritz {
    fn residual(&self) -> f64 {
        let lam = 1.0 / self.theta;
        let r: Vec<f64> = self.ku.iter().zip(&self.gu).map(|(k, g)| k - lam * g).collect();
        norm(&r)
    }

    fn backward_error(&self, norms: (f64, f64)) -> f64 {
        self.residual() / ((norms.0 + norms.1 / self.theta.abs()) * norm(&self.u))
    }
}

/// Maximum absolute row sum.
fn inf_norm(a: &SparseOperator) -> f64 {
    (0..a.n_rows()).map(|r| a.row(r).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn rayleigh_ritz(basis: &Basis) -> Vec<Ritz> {
    let m = basis.len();
    let h = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&basis.v[i], &basis.gv[j]) + dot(&basis.v[j], &basis.gv[i])));
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order
        .into_iter()
        .map(|j| {
            let y: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
            Ritz {
                theta: eig.eigenvalues[j],
                u: basis.combine(&basis.v, &y),
                ku: basis.combine(&basis.kv, &y),
                gu: basis.combine(&basis.gv, &y),
            }
        })
        .collect()
}

/// The `count` smallest positive eigenvalues of `K U = lambda G U`, with
/// `K` symmetric positive definite and `G` symmetric, sorted ascending.
pub fn smallest_eigenpairs(
    k: &SparseOperator,
    g: &SparseOperator,
    count: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    let n = k.n_rows();
    if count == 0 {
        return Err(Error::param("count", "at least one eigenpair must be requested"));
    }
    if g.n_rows() != n || k.n_cols() != n || g.n_cols() != n {
        return Err(Error::LengthMismatch {
            name: "pencil".into(),
            expected: n,
            actual: g.n_rows(),
        });
    }
    if count > n {
        return Err(Error::param("count", format!("{count} eigenpairs requested from a {n}-dimensional pencil")));
    }
    if g.max_abs() == 0.0 {
        return Err(Error::NoBucklingMode);
    }
    let fact = factor_spd(k)?;
    solve_with_factor(k, g, &fact, count, opts)
}

/// As [`smallest_eigenpairs`] with a precomputed factorization of `K`.
pub fn solve_with_factor(
    k: &SparseOperator,
    g: &SparseOperator,
    fact: &Factorization,
    count: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    let n = k.n_rows();
    let p = (count + opts.guard).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut block: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    // one application of M filters the start block towards the wanted end
    block = fact.solve_many(&block.iter().map(|b| g.mul(b)).collect::<Vec<_>>());
    let norms = (inf_norm(k), inf_norm(g));
    let mut best = f64::INFINITY;
    for restart in 0..opts.max_restarts {
        let mut basis = Basis::new(k, g);
        let mut added = basis.extend(block);
        for _ in 0..opts.krylov_steps {
            if added == 0 || basis.len() >= n {
                break;
            }
            let start = basis.len() - added;
            let next = fact.solve_many(&basis.gv[start..]);
            added = basis.extend(next);
        }
        if basis.len() == 0 {
            return Err(Error::NoBucklingMode);
        }
        let ritz = rayleigh_ritz(&basis);
        let scale = ritz.iter().fold(0.0f64, |m, r| m.max(r.theta.abs()));
        let positive = ritz.iter().take_while(|r| r.theta > 1e-12 * scale).count();
        if positive == 0 {
            return Err(Error::NoBucklingMode);
        }
        let worst = if positive >= count {
            ritz[..count].iter().map(|r| r.backward_error(norms)).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        best = best.min(worst);
        debug!("restart {restart}: basis {} worst residual {worst:.3e}", basis.len());
        if worst <= opts.tol {
            let mut pairs: Vec<EigenPair> = ritz
                .into_iter()
                .take(count)
                .map(|r| {
                    let residual_norm = r.backward_error(norms);
                    let relative_residual = r.residual() / norm(&r.ku);
                    let mut vector = r.u;
                    fix_sign(&mut vector);
                    EigenPair {
                        lambda_hat: 1.0 / r.theta,
                        vector,
                        residual_norm,
                        relative_residual,
                    }
                })
                .collect();
            pairs.sort_by(|a, b| a.lambda_hat.total_cmp(&b.lambda_hat));
            return Ok(pairs);
        }
        if positive < count && basis.len() >= n {
            return Err(Error::NoBucklingMode);
        }
        block = ritz.into_iter().take(p).map(|r| r.u).collect();
    }
    Err(Error::Convergence {
        iterations: opts.max_restarts,
        residual: best,
    })
}
