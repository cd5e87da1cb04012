//! Quadrature on the reference triangle `{(x, y) : x, y >= 0, x + y <= 1}`
//! and Gauss-Legendre rules on `[0, 1]`.

use crate::error::{Error, Result};

/// Highest polynomial order the triangle rules are built for.
pub const MAX_ORDER: usize = 40;

/// Points and weights on the reference triangle. Weights sum to 1/2.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// `n`-point Gauss-Legendre rule mapped to `[0, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton on P_n starting from the Chebyshev-like guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the descending root; map to [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Rule exact for polynomials of total degree `order` on the reference
/// triangle. Order 1 is the centroid rule; order 2 the three-point edge
/// midpoint-interior rule; higher orders use a collapsed Gauss product.
pub fn triangle_rule(order: usize) -> Result<TriangleRule> {
    match order {
        0 => Err(Error::param("order", "quadrature order must be at least 1")),
        1 => Ok(TriangleRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
        }),
        2 => Ok(TriangleRule {
            points: vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
            weights: vec![1.0 / 6.0; 3],
        }),
        o if o > MAX_ORDER => Err(Error::param(
            "order",
            format!("quadrature order {o} exceeds the supported maximum {MAX_ORDER}"),
        )),
        o => {
            // x = u, y = (1 - u) v with Jacobian (1 - u)
            let nu = (o + 2).div_ceil(2);
            let nv = (o + 1).div_ceil(2);
            let (un, uw) = gauss_legendre(nu);
            let (vn, vw) = gauss_legendre(nv);
            let mut points = Vec::with_capacity(nu * nv);
            let mut weights = Vec::with_capacity(nu * nv);
            for (&u, &wu) in un.iter().zip(&uw) {
                for (&v, &wv) in vn.iter().zip(&vw) {
                    points.push([u, (1.0 - u) * v]);
                    weights.push(wu * wv * (1.0 - u));
                }
            }
            Ok(TriangleRule { points, weights })
        }
    }
}
