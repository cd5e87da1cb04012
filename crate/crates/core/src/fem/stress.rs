//! Membrane stress fields entering the geometric stiffness.

use super::basis::{monomials, ElementMap, LagrangeBasis};
use super::material::Sym2;
use crate::mesh::Mesh;

/// Elementwise symmetric stress tensor `Sigma_M`.
#[derive(Debug, Clone, PartialEq)]
pub enum StressField {
    /// The same tensor on every element.
    Constant(Sym2),
    /// Per-element polynomials in the element's reference coordinates.
    /// `coeffs[t]` holds `[xx, xy, yy]` monomial coefficients in the order of
    /// [`monomials`]`(degree)`.
    Polynomial {
        degree: usize,
        coeffs: Vec<[Vec<f64>; 3]>,
    },
}

impl StressField {
    pub fn zero() -> Self {
        StressField::Constant(Sym2::ZERO)
    }

    pub fn degree(&self) -> usize {
        match self {
            StressField::Constant(_) => 0,
            StressField::Polynomial { degree, .. } => *degree,
        }
    }

    /// `factor * self`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            StressField::Constant(s) => StressField::Constant(factor * *s),
            StressField::Polynomial { degree, coeffs } => StressField::Polynomial {
                degree: *degree,
                coeffs: coeffs
                    .iter()
                    .map(|c| c.clone().map(|v| v.into_iter().map(|x| factor * x).collect()))
                    .collect(),
            },
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, StressField::Constant(_))
    }

    /// Value at reference point `xi` of triangle `t`.
    pub fn eval(&self, t: usize, xi: [f64; 2]) -> Sym2 {
        match self {
            StressField::Constant(s) => *s,
            StressField::Polynomial { degree, coeffs } => {
                let m = monomials(*degree);
                let c = &coeffs[t];
                let mut out = [0.0; 3];
                for (j, e) in m.iter().enumerate() {
                    let v = xi[0].powi(e[0] as i32) * xi[1].powi(e[1] as i32);
                    for k in 0..3 {
                        out[k] += c[k][j] * v;
                    }
                }
                Sym2::new(out[0], out[1], out[2])
            }
        }
    }

    /// Physical partial derivatives `[d/dx, d/dy]` at `xi` of triangle `t`.
    pub fn gradient(&self, t: usize, xi: [f64; 2], map: &ElementMap) -> [Sym2; 2] {
        match self {
            StressField::Constant(_) => [Sym2::ZERO; 2],
            StressField::Polynomial { degree, coeffs } => {
                let m = monomials(*degree);
                let c = &coeffs[t];
                let mut d = [[0.0; 3]; 2];
                for (j, e) in m.iter().enumerate() {
                    let dxi = if e[0] > 0 {
                        e[0] as f64 * xi[0].powi(e[0] as i32 - 1) * xi[1].powi(e[1] as i32)
                    } else {
                        0.0
                    };
                    let deta = if e[1] > 0 {
                        e[1] as f64 * xi[0].powi(e[0] as i32) * xi[1].powi(e[1] as i32 - 1)
                    } else {
                        0.0
                    };
                    let g = map.gradient(&[dxi, deta]);
                    for k in 0..3 {
                        d[0][k] += c[k][j] * g[0];
                        d[1][k] += c[k][j] * g[1];
                    }
                }
                [Sym2::new(d[0][0], d[0][1], d[0][2]), Sym2::new(d[1][0], d[1][1], d[1][2])]
            }
        }
    }

    /// Restriction to a refined mesh; `parent[t]` is the triangle of `coarse`
    /// containing triangle `t` of `fine`.
    pub fn transfer(&self, coarse: &Mesh, fine: &Mesh, parent: &[usize]) -> StressField {
        let (degree, coeffs) = match self {
            StressField::Constant(_) => return self.clone(),
            StressField::Polynomial { degree, coeffs } => (*degree, coeffs),
        };
        if degree == 0 {
            return StressField::Polynomial {
                degree,
                coeffs: parent.iter().map(|&p| coeffs[p].clone()).collect(),
            };
        }
        let basis = LagrangeBasis::new(degree).expect("stress degree within basis range");
        let nm = basis.n_local();
        let coeffs = (0..fine.n_triangles())
            .map(|t| {
                let p = parent[t];
                let fine_map = ElementMap::new(fine.corners(t));
                let coarse_map = ElementMap::new(coarse.corners(p));
                let mut out = [vec![0.0; nm], vec![0.0; nm], vec![0.0; nm]];
                for (i, &node) in basis.nodes().iter().enumerate() {
                    let s = self.eval(p, coarse_map.to_reference(fine_map.to_physical(node)));
                    for (j, c) in basis.coefficients(i).iter().enumerate() {
                        out[0][j] += s.xx * c;
                        out[1][j] += s.xy * c;
                        out[2][j] += s.yy * c;
                    }
                }
                out
            })
            .collect();
        StressField::Polynomial { degree, coeffs }
    }

    /// `div Sigma` at `xi` of triangle `t`.
    pub fn divergence(&self, t: usize, xi: [f64; 2], map: &ElementMap) -> [f64; 2] {
        let [dx, dy] = self.gradient(t, xi, map);
        [dx.xx + dy.xy, dx.xy + dy.yy]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_field_and_divergence() {
        // on the reference map, Sigma = [[x, y], [y, 2x]] -> div = (1 + 1, 0 + 0)
        let deg = 1;
        let m = monomials(deg);
        assert_eq!(m, vec![[0, 0], [1, 0], [0, 1]]);
        let f = StressField::Polynomial {
            degree: deg,
            coeffs: vec![[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 2.0, 0.0]]],
        };
        let map = ElementMap::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let s = f.eval(0, [0.25, 0.5]);
        assert_eq!(s, Sym2::new(0.25, 0.5, 0.5));
        let d = f.divergence(0, [0.25, 0.5], &map);
        assert_relative_eq!(d[0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(d[1], 0.0, epsilon = 1e-15);
        assert_eq!(StressField::Constant(Sym2::IDENTITY).divergence(0, [0.1, 0.1], &map), [0.0, 0.0]);
    }

    #[test]
    fn transfer_to_refined_mesh_preserves_values() {
        use crate::mesh::{bisect, build_lshape};
        let coarse = build_lshape(1).unwrap();
        let all: Vec<usize> = (0..coarse.n_triangles()).collect();
        let r = bisect(&coarse, &all).unwrap();
        let nt = coarse.n_triangles();
        let f = StressField::Polynomial {
            degree: 2,
            coeffs: (0..nt)
                .map(|t| {
                    let v: Vec<f64> = (0..6).map(|j| (t * 6 + j) as f64 * 0.1 - 1.0).collect();
                    [v.clone(), v.iter().map(|x| 2.0 * x).collect(), v.iter().map(|x| x * x).collect()]
                })
                .collect(),
        };
        let g = f.transfer(&coarse, &r.mesh, &r.parent);
        for t in 0..r.mesh.n_triangles() {
            let p = r.parent[t];
            let fm = ElementMap::new(r.mesh.corners(t));
            let cm = ElementMap::new(coarse.corners(p));
            for xi in [[0.1, 0.2], [0.6, 0.3], [0.0, 1.0]] {
                let a = g.eval(t, xi);
                let b = f.eval(p, cm.to_reference(fm.to_physical(xi)));
                assert!((a - b).max_abs() < 1e-12);
            }
        }
    }
}
