//! Lagrange bases on the reference triangle and their derivatives.
//!
//! Basis functions are stored as monomial coefficients in the reference
//! coordinates `(xi, eta)`, so derivatives of any order are exact. A
//! derivative of order `r` is stored as the `r + 1` mixed partials
//! `d^r / (dxi^(r-s) deta^s)` for `s = 0..=r`. The same layout is used for
//! physical derivatives `d^r / (dx^(r-s) dy^s)`.

use nalgebra::DMatrix;

use super::material::Sym2;
use super::quadrature::{gauss_legendre, triangle_rule, TriangleRule};
use crate::error::{Error, Result};

/// Highest derivative order kept in tables.
pub const MAX_DERIVATIVE: usize = 4;

/// Position of a local node within the reference element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Vertex(usize),
    /// `position` runs `1..k` from the counter-clockwise start of the edge.
    Edge { edge: usize, position: usize },
    Interior(usize),
}

/// Monomial exponents `(a, b)` with `a + b <= k`, ordered by total degree.
pub fn monomials(k: usize) -> Vec<[u32; 2]> {
    let mut out = Vec::with_capacity((k + 1) * (k + 2) / 2);
    for total in 0..=k as u32 {
        for b in 0..=total {
            out.push([total - b, b]);
        }
    }
    out
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|i| f64::from(n - i)).product()
}

/// `d^p/dxi^p d^q/deta^q (xi^a eta^b)` at `pt`.
fn monomial_derivative(m: [u32; 2], p: u32, q: u32, pt: [f64; 2]) -> f64 {
    if p > m[0] || q > m[1] {
        return 0.0;
    }
    falling(m[0], p) * falling(m[1], q) * pt[0].powi((m[0] - p) as i32) * pt[1].powi((m[1] - q) as i32)
}

/// Nodal Lagrange basis of degree `k` on equispaced lattice nodes.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    degree: usize,
    nodes: Vec<[f64; 2]>,
    kinds: Vec<NodeKind>,
    monomials: Vec<[u32; 2]>,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coeffs: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k > 6 {
            return Err(Error::param("degree", format!("polynomial degree must be in 1..=6, got {k}")));
        }
        let kf = k as f64;
        let mut lattice: Vec<([usize; 2], NodeKind)> = vec![
            ([0, 0], NodeKind::Vertex(0)),
            ([k, 0], NodeKind::Vertex(1)),
            ([0, k], NodeKind::Vertex(2)),
        ];
        for i in 1..k {
            lattice.push(([k - i, i], NodeKind::Edge { edge: 0, position: i }));
        }
        for i in 1..k {
            lattice.push(([0, k - i], NodeKind::Edge { edge: 1, position: i }));
        }
        for i in 1..k {
            lattice.push(([i, 0], NodeKind::Edge { edge: 2, position: i }));
        }
        let mut interior = 0;
        for j in 1..k {
            for i in 1..k - j {
                lattice.push(([i, j], NodeKind::Interior(interior)));
                interior += 1;
            }
        }
        let nodes: Vec<[f64; 2]> = lattice.iter().map(|(ij, _)| [ij[0] as f64 / kf, ij[1] as f64 / kf]).collect();
        let kinds = lattice.iter().map(|(_, kind)| *kind).collect();
        let monomials = monomials(k);
        let n = nodes.len();
        debug_assert_eq!(n, monomials.len());
        let vandermonde = DMatrix::from_fn(n, n, |i, j| monomial_derivative(monomials[j], 0, 0, nodes[i]));
        let inv = vandermonde
            .try_inverse()
            .ok_or_else(|| Error::param("degree", "singular Vandermonde matrix"))?;
        // basis i = sum_j inv[j, i] m_j
        let mut coeffs = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                coeffs[i * n + j] = inv[(j, i)];
            }
        }
        Ok(Self {
            degree: k,
            nodes,
            kinds,
            monomials,
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_local(&self) -> usize {
        self.nodes.len()
    }

    /// Reference coordinates of the local nodes.
    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node_kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn monomials(&self) -> &[[u32; 2]] {
        &self.monomials
    }

    /// Monomial coefficients of basis function `i`.
    pub fn coefficients(&self, i: usize) -> &[f64] {
        let n = self.monomials.len();
        &self.coeffs[i * n..(i + 1) * n]
    }

    /// Mixed partials of order `r` of all basis functions at `pt`, laid out
    /// `[i * (r + 1) + s]`.
    pub fn ref_derivatives(&self, pt: [f64; 2], r: usize) -> Vec<f64> {
        let n = self.n_local();
        let mut out = vec![0.0; n * (r + 1)];
        let mono: Vec<Vec<f64>> = (0..=r)
            .map(|s| {
                self.monomials
                    .iter()
                    .map(|&m| monomial_derivative(m, (r - s) as u32, s as u32, pt))
                    .collect()
            })
            .collect();
        for i in 0..n {
            let c = self.coefficients(i);
            for s in 0..=r {
                out[i * (r + 1) + s] = c.iter().zip(&mono[s]).map(|(a, b)| a * b).sum();
            }
        }
        out
    }

    /// Monomial coefficients (in the degree-`k` monomial list) of
    /// `d^p/dxi^p d^q/deta^q` applied to basis function `i`.
    pub fn derivative_coefficients(&self, i: usize, p: u32, q: u32) -> Vec<f64> {
        let c = self.coefficients(i);
        let mut out = vec![0.0; self.monomials.len()];
        for (j, &m) in self.monomials.iter().enumerate() {
            if p > m[0] || q > m[1] || c[j] == 0.0 {
                continue;
            }
            let target = [m[0] - p, m[1] - q];
            let idx = self.monomials.iter().position(|&x| x == target).unwrap();
            out[idx] += c[j] * falling(m[0], p) * falling(m[1], q);
        }
        out
    }
}

/// Reference derivatives of a basis at a fixed point set.
#[derive(Debug, Clone)]
pub struct RefTable {
    n_local: usize,
    n_points: usize,
    max_order: usize,
    data: Vec<Vec<f64>>,
}

impl RefTable {
    pub fn new(basis: &LagrangeBasis, points: &[[f64; 2]], max_order: usize) -> Self {
        let n_local = basis.n_local();
        let data = (0..=max_order)
            .map(|r| points.iter().flat_map(|&p| basis.ref_derivatives(p, r)).collect())
            .collect();
        Self {
            n_local,
            n_points: points.len(),
            max_order,
            data,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn get(&self, r: usize, q: usize, i: usize) -> &[f64] {
        let w = r + 1;
        let start = (q * self.n_local + i) * w;
        &self.data[r][start..start + w]
    }
}

/// Affine map from the reference triangle onto a physical triangle.
#[derive(Debug, Clone)]
pub struct ElementMap {
    pub origin: [f64; 2],
    /// Columns are the edge vectors `p1 - p0` and `p2 - p0`.
    pub jac: [[f64; 2]; 2],
    /// `inv[a][d] = d xi_a / d x_d`.
    pub inv: [[f64; 2]; 2],
    pub det: f64,
    transforms: Vec<Vec<f64>>,
}

impl ElementMap {
    pub fn new(corners: [[f64; 2]; 3]) -> Self {
        let [p0, p1, p2] = corners;
        let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        // d/dx = a d/dxi + b d/deta, d/dy = c d/dxi + d d/deta
        let (a, b, c, d) = (inv[0][0], inv[1][0], inv[0][1], inv[1][1]);
        let transforms = (0..=MAX_DERIVATIVE)
            .map(|r| {
                let mut t = vec![0.0; (r + 1) * (r + 1)];
                for p in 0..=r {
                    // (a + b z)^(r - p) (c + d z)^p
                    let mut poly = vec![1.0];
                    for _ in 0..r - p {
                        poly = mul_linear(&poly, a, b);
                    }
                    for _ in 0..p {
                        poly = mul_linear(&poly, c, d);
                    }
                    t[p * (r + 1)..(p + 1) * (r + 1)].copy_from_slice(&poly);
                }
                t
            })
            .collect();
        Self {
            origin: p0,
            jac,
            inv,
            det,
            transforms,
        }
    }

    pub fn to_physical(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn to_reference(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inv[0][0] * d[0] + self.inv[0][1] * d[1],
            self.inv[1][0] * d[0] + self.inv[1][1] * d[1],
        ]
    }

    /// Maps reference mixed partials of order `r` to physical ones.
    pub fn transform(&self, r: usize, reference: &[f64], physical: &mut [f64]) {
        let t = &self.transforms[r];
        for p in 0..=r {
            physical[p] = (0..=r).map(|s| t[p * (r + 1) + s] * reference[s]).sum();
        }
    }

    /// Physical gradient from the reference gradient.
    pub fn gradient(&self, reference: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        self.transform(1, reference, &mut g);
        g
    }
}

fn mul_linear(poly: &[f64], c0: f64, c1: f64) -> Vec<f64> {
    let mut out = vec![0.0; poly.len() + 1];
    for (k, &p) in poly.iter().enumerate() {
        out[k] += c0 * p;
        out[k + 1] += c1 * p;
    }
    out
}

/// Physical derivatives of every local basis function at the points of a
/// [`RefTable`], for one element.
#[derive(Debug, Clone)]
pub struct PhysTable {
    n_local: usize,
    data: Vec<Vec<f64>>,
}

impl PhysTable {
    pub fn new(table: &RefTable, map: &ElementMap, max_order: usize) -> Self {
        let n_local = table.n_local();
        let max_order = max_order.min(table.max_order());
        let data = (0..=max_order)
            .map(|r| {
                let mut out = vec![0.0; table.n_points() * n_local * (r + 1)];
                for q in 0..table.n_points() {
                    for i in 0..n_local {
                        let start = (q * n_local + i) * (r + 1);
                        map.transform(r, table.get(r, q, i), &mut out[start..start + r + 1]);
                    }
                }
                out
            })
            .collect();
        Self { n_local, data }
    }

    pub fn get(&self, r: usize, q: usize, i: usize) -> &[f64] {
        let start = (q * self.n_local + i) * (r + 1);
        &self.data[r][start..start + r + 1]
    }

    pub fn value(&self, q: usize, i: usize) -> f64 {
        self.data[0][q * self.n_local + i]
    }

    pub fn grad(&self, q: usize, i: usize) -> [f64; 2] {
        let g = self.get(1, q, i);
        [g[0], g[1]]
    }

    pub fn hessian(&self, q: usize, i: usize) -> Sym2 {
        let h = self.get(2, q, i);
        Sym2::new(h[0], h[1], h[2])
    }
}

/// Physical derivatives of order `r` of the field with local coefficients
/// `coeffs` at point `q` of `table`.
pub fn field_derivative(table: &RefTable, map: &ElementMap, coeffs: &[f64], r: usize, q: usize) -> Vec<f64> {
    let mut reference = vec![0.0; r + 1];
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (acc, v) in reference.iter_mut().zip(table.get(r, q, i)) {
            *acc += c * v;
        }
    }
    let mut out = vec![0.0; r + 1];
    map.transform(r, &reference, &mut out);
    out
}

/// Basis, interior quadrature and edge quadrature tables for one degree.
#[derive(Debug, Clone)]
pub struct RefElement {
    pub basis: LagrangeBasis,
    pub quad: TriangleRule,
    pub quad_table: RefTable,
    /// Gauss points on `[0, 1]` used on every edge.
    pub edge_points: Vec<f64>,
    pub edge_weights: Vec<f64>,
    /// `edge_tables[e][0]` walks local edge `e` counter-clockwise,
    /// `edge_tables[e][1]` walks it backwards.
    edge_tables: Vec<[RefTable; 2]>,
}

/// Reference coordinates of the local vertices.
pub const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

impl RefElement {
    pub fn new(k: usize) -> Result<Self> {
        let basis = LagrangeBasis::new(k)?;
        let quad = triangle_rule((2 * k + 2).max(3 * k))?;
        let order = MAX_DERIVATIVE.min(k.max(2) + 2);
        let quad_table = RefTable::new(&basis, &quad.points, order);
        let (edge_points, edge_weights) = gauss_legendre(k + 2);
        let edge_tables = (0..3)
            .map(|e| {
                let a = REF_VERTICES[(e + 1) % 3];
                let b = REF_VERTICES[(e + 2) % 3];
                let along = |s: f64| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                let fwd: Vec<[f64; 2]> = edge_points.iter().map(|&s| along(s)).collect();
                let bwd: Vec<[f64; 2]> = edge_points.iter().map(|&s| along(1.0 - s)).collect();
                [RefTable::new(&basis, &fwd, order), RefTable::new(&basis, &bwd, order)]
            })
            .collect();
        Ok(Self {
            basis,
            quad,
            quad_table,
            edge_points,
            edge_weights,
            edge_tables,
        })
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn n_local(&self) -> usize {
        self.basis.n_local()
    }

    /// Table for local edge `edge`; `reversed` walks it clockwise.
    pub fn edge_table(&self, edge: usize, reversed: bool) -> &RefTable {
        &self.edge_tables[edge][reversed as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nodal_property_and_partition_of_unity() {
        for k in 1..=5 {
            let b = LagrangeBasis::new(k).unwrap();
            assert_eq!(b.n_local(), (k + 1) * (k + 2) / 2);
            for (j, &node) in b.nodes().iter().enumerate() {
                let v = b.ref_derivatives(node, 0);
                for (i, &vi) in v.iter().enumerate() {
                    assert_relative_eq!(vi, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-10);
                }
            }
            let v = b.ref_derivatives([0.21, 0.37], 0);
            assert_relative_eq!(v.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            let g = b.ref_derivatives([0.21, 0.37], 1);
            let gx: f64 = (0..b.n_local()).map(|i| g[2 * i]).sum();
            assert!(gx.abs() < 1e-10);
        }
    }

    #[test]
    fn edge_nodes_follow_ccw_order() {
        let b = LagrangeBasis::new(3).unwrap();
        for (kind, node) in b.node_kinds().iter().zip(b.nodes()) {
            if let NodeKind::Edge { edge, position } = *kind {
                let a = REF_VERTICES[(edge + 1) % 3];
                let c = REF_VERTICES[(edge + 2) % 3];
                let s = position as f64 / 3.0;
                assert_relative_eq!(node[0], a[0] + s * (c[0] - a[0]), epsilon = 1e-15);
                assert_relative_eq!(node[1], a[1] + s * (c[1] - a[1]), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn physical_derivatives_of_interpolated_cubic() {
        // f(x, y) = x^3 - 2 x y^2 + y on a skewed triangle
        let f = |p: [f64; 2]| p[0].powi(3) - 2.0 * p[0] * p[1] * p[1] + p[1];
        let corners = [[0.3, 0.1], [1.2, 0.4], [0.5, 1.1]];
        let map = ElementMap::new(corners);
        let b = LagrangeBasis::new(3).unwrap();
        let coeffs: Vec<f64> = b.nodes().iter().map(|&n| f(map.to_physical(n))).collect();
        let pt = [0.2, 0.3];
        let table = RefTable::new(&b, &[pt], 3);
        let x = map.to_physical(pt);
        let d1 = field_derivative(&table, &map, &coeffs, 1, 0);
        assert_relative_eq!(d1[0], 3.0 * x[0] * x[0] - 2.0 * x[1] * x[1], epsilon = 1e-10);
        assert_relative_eq!(d1[1], -4.0 * x[0] * x[1] + 1.0, epsilon = 1e-10);
        let d2 = field_derivative(&table, &map, &coeffs, 2, 0);
        assert_relative_eq!(d2[0], 6.0 * x[0], epsilon = 1e-9);
        assert_relative_eq!(d2[1], -4.0 * x[1], epsilon = 1e-9);
        assert_relative_eq!(d2[2], -4.0 * x[0], epsilon = 1e-9);
        let d3 = field_derivative(&table, &map, &coeffs, 3, 0);
        for (got, want) in d3.iter().zip([6.0, 0.0, -4.0, 0.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn reference_round_trip() {
        let map = ElementMap::new([[0.3, 0.1], [1.2, 0.4], [0.5, 1.1]]);
        let xi = [0.17, 0.61];
        let back = map.to_reference(map.to_physical(xi));
        assert_relative_eq!(back[0], xi[0], epsilon = 1e-14);
        assert_relative_eq!(back[1], xi[1], epsilon = 1e-14);
    }

    #[test]
    fn derivative_coefficients_match_tables() {
        let b = LagrangeBasis::new(2).unwrap();
        let pt = [0.4, 0.25];
        let d = b.ref_derivatives(pt, 1);
        for i in 0..b.n_local() {
            let cx = b.derivative_coefficients(i, 1, 0);
            let v: f64 = cx.iter().zip(b.monomials()).map(|(c, &m)| c * monomial_derivative(m, 0, 0, pt)).sum();
            assert_relative_eq!(v, d[2 * i], epsilon = 1e-12);
        }
    }
}
