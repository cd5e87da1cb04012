//! Preconditioned MINRES for symmetric, possibly indefinite systems.

use crate::error::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy)]
pub struct MinresOptions {
    /// Relative tolerance on the true residual `|b - A x| / |b|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MinresOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 2000,
        }
    }
}

/// Solves `A x = b` with `A` symmetric and `precond` applying an SPD
/// approximation of `A^{-1}`. Returns `x` and the relative true residual.
pub fn minres(
    a: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    opts: &MinresOptions,
) -> Result<(Vec<f64>, f64)> {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0.0));
    }
    let mut iterations = 0;
    let mut rel = 1.0;
    for _ in 0..8 {
        let ax = a(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= opts.tol || iterations >= opts.max_iter {
            break;
        }
        let (dx, its) = minres_pass(&a, &precond, &r, 0.1 * opts.tol * bnorm / (rel * bnorm), opts.max_iter - iterations);
        iterations += its;
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
    }
    if rel <= opts.tol {
        Ok((x, rel))
    } else {
        Err(Error::Convergence {
            iterations,
            residual: rel,
        })
    }
}

/// One MINRES run from zero; stops when the preconditioned residual
/// estimate drops by `rtol`.
fn minres_pass(
    a: &impl Fn(&[f64]) -> Vec<f64>,
    precond: &impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    rtol: f64,
    max_iter: usize,
) -> (Vec<f64>, usize) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y = precond(&r1);
    let beta1 = dot(&r1, &y).max(0.0).sqrt();
    if beta1 == 0.0 {
        return (x, 0);
    }
    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0, 0.0);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    for itn in 1..=max_iter {
        let s = 1.0 / beta;
        let v: Vec<f64> = y.iter().map(|yi| s * yi).collect();
        y = a(&v);
        if itn >= 2 {
            let f = beta / oldb;
            y.iter_mut().zip(&r1).for_each(|(yi, ri)| *yi -= f * ri);
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        y.iter_mut().zip(&r2).for_each(|(yi, ri)| *yi -= f * ri);
        r1 = std::mem::replace(&mut r2, y);
        y = precond(&r2);
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, w);
        w = (0..n).map(|i| (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma).collect();
        x.iter_mut().zip(&w).for_each(|(xi, wi)| *xi += phi * wi);
        if phibar <= rtol * beta1 || beta == 0.0 {
            return (x, itn);
        }
    }
    (x, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_indefinite_diagonal() {
        let d = [3.0, -2.0, 0.5, -7.0, 1.0];
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        let (x, res) = minres(
            |v| v.iter().zip(&d).map(|(a, b)| a * b).collect(),
            |v| v.to_vec(),
            &b,
            &MinresOptions::default(),
        )
        .unwrap();
        assert!(res <= 1e-10);
        for i in 0..5 {
            assert!((x[i] - b[i] / d[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn preconditioner_does_not_change_solution() {
        // symmetric tridiagonal, indefinite after a shift
        let n = 30;
        let apply = |v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let mut s = (2.0 - 0.3) * v[i];
                    if i > 0 {
                        s -= v[i - 1];
                    }
                    if i + 1 < n {
                        s -= v[i + 1];
                    }
                    s
                })
                .collect()
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let (x, res) = minres(apply, |v| v.iter().map(|a| a / 2.0).collect(), &b, &MinresOptions::default()).unwrap();
        assert!(res <= 1e-10);
        let r: Vec<f64> = apply(&x).iter().zip(&b).map(|(a, b)| a - b).collect();
        assert!(dot(&r, &r).sqrt() <= 1e-9);
    }
}
