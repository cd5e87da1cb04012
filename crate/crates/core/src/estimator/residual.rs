//! Element residuals of the plate and membrane problems.

use crate::fem::basis::field_derivative;
use crate::fem::material::{membrane_stress, plate_stress, Material, Sym2};
use crate::fem::{FeSpace, PlateBc, PlateOptions, StressField};
use crate::par;

/// Raw edge integrals of the squared plate jumps, over the full edge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlateEdgeJumps {
    /// `|[D d_n Laplace U]|^2`.
    pub shear: f64,
    /// `|[n . sigma_P(H U)]|^2`, normal-normal part only on simply
    /// supported boundary edges.
    pub moment: f64,
    /// `|[grad U]|^2`.
    pub gradient: f64,
}

/// Coefficient multiplying `h_E^{-5} |[grad U]|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JumpWeight {
    /// `(beta gamma)^2`, the squared penalty of the plate form.
    #[default]
    Penalty,
    /// `gamma^2`.
    Gamma,
}

impl JumpWeight {
    pub fn value(self, opts: &PlateOptions, mat: &Material) -> f64 {
        match self {
            JumpWeight::Penalty => opts.penalty(mat).powi(2),
            JumpWeight::Gamma => opts.gamma * opts.gamma,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            JumpWeight::Penalty => "penalty",
            JumpWeight::Gamma => "gamma",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "penalty" => Some(JumpWeight::Penalty),
            "gamma" => Some(JumpWeight::Gamma),
            _ => None,
        }
    }
}

/// Plate residuals: `r2[t] = R_{P,T}^2`.
#[derive(Debug, Clone)]
pub struct PlateResidual {
    pub interior: Vec<f64>,
    pub edges: Vec<PlateEdgeJumps>,
    pub r2: Vec<f64>,
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Derivatives of a scalar field at one point: gradient, Hessian, gradient
/// of the Laplacian.
struct Local {
    grad: [f64; 2],
    hess: Sym2,
    grad_lap: [f64; 2],
}

fn local_scalar(space: &FeSpace, u: &[f64], t: usize, e: usize, q: usize) -> Local {
    let table = space.edge_table(e, t);
    let map = space.element_map(t);
    let c = space.local_coefficients(t, u, 0);
    let d1 = field_derivative(table, &map, &c, 1, q);
    let d2 = field_derivative(table, &map, &c, 2, q);
    let d3 = field_derivative(table, &map, &c, 3, q);
    Local {
        grad: [d1[0], d1[1]],
        hess: Sym2::new(d2[0], d2[1], d2[2]),
        grad_lap: [d3[0] + d3[2], d3[1] + d3[3]],
    }
}

/// `R_{P,T}^2` with source `lambda_hat t div(Sigma grad U)`. Interior edge
/// contributions are split evenly between the two neighbours.
pub fn plate_element_residual(
    space: &FeSpace,
    u: &[f64],
    lambda_hat: f64,
    sigma: &StressField,
    mat: &Material,
    opts: &PlateOptions,
    jump: JumpWeight,
) -> PlateResidual {
    let mesh = space.mesh();
    let el = space.element();
    let interior = par::map_range(mesh.n_triangles(), |t| {
        let map = space.element_map(t);
        let c = space.local_coefficients(t, u, 0);
        let mut acc = 0.0;
        for (q, (xi, w)) in el.quad.points.iter().zip(&el.quad.weights).enumerate() {
            let d1 = field_derivative(&el.quad_table, &map, &c, 1, q);
            let d2 = field_derivative(&el.quad_table, &map, &c, 2, q);
            let d4 = field_derivative(&el.quad_table, &map, &c, 4, q);
            let s = sigma.eval(t, *xi);
            let div_s = sigma.divergence(t, *xi, &map);
            let hess = Sym2::new(d2[0], d2[1], d2[2]);
            let source = lambda_hat * mat.t * (s.ddot(&hess) + div_s[0] * d1[0] + div_s[1] * d1[1]);
            let bilap = d4[0] + 2.0 * d4[2] + d4[4];
            acc += w * map.det * (source + mat.d * bilap).powi(2);
        }
        acc
    });

    let edges = par::map_range(mesh.n_edges(), |e| {
        let edge = &mesh.edges()[e];
        let n = edge.normal;
        let (_, wts) = space.edge_quadrature(e);
        let mut jumps = PlateEdgeJumps::default();
        match edge.minus {
            Some(m) => {
                for (q, w) in wts.iter().enumerate() {
                    let a = local_scalar(space, u, edge.plus, e, q);
                    let b = local_scalar(space, u, m, e, q);
                    let shear = mat.d * dot(n, sub(a.grad_lap, b.grad_lap));
                    let mom = sub(plate_stress(a.hess, mat).apply(n), plate_stress(b.hess, mat).apply(n));
                    let g = sub(a.grad, b.grad);
                    jumps.shear += w * shear * shear;
                    jumps.moment += w * dot(mom, mom);
                    jumps.gradient += w * dot(g, g);
                }
            }
            None => {
                for (q, w) in wts.iter().enumerate() {
                    let a = local_scalar(space, u, edge.plus, e, q);
                    match opts.bc {
                        PlateBc::SimplySupported => {
                            let mnn = dot(n, plate_stress(a.hess, mat).apply(n));
                            jumps.moment += w * mnn * mnn;
                        }
                        PlateBc::Clamped => jumps.gradient += w * dot(a.grad, a.grad),
                    }
                }
            }
        }
        jumps
    });

    let weight = jump.value(opts, mat);
    let r2 = (0..mesh.n_triangles())
        .map(|t| {
            let h = mesh.diameter(t);
            let mut acc = interior[t];
            for &e in &mesh.triangle_edges(t) {
                let edge = &mesh.edges()[e];
                let share = if edge.is_boundary() { 1.0 } else { 0.5 };
                let j = &edges[e];
                acc += share
                    * (j.shear / h + j.moment / h.powi(3) + weight * j.gradient / edge.h_e.powi(5));
            }
            acc
        })
        .collect();
    PlateResidual { interior, edges, r2 }
}

/// Edge term used in the membrane residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MembraneEdgeTerm {
    /// `|[n . sigma_M]|`.
    #[default]
    TractionJump,
    /// `|[n . div sigma_M]|`.
    DivergenceJump,
}

/// Membrane residuals: `r2[t] = R_{M,T}^2`.
#[derive(Debug, Clone)]
pub struct MembraneResidual {
    pub interior: Vec<f64>,
    /// Raw squared-jump integral per edge; zero on clamped edges.
    pub edges: Vec<f64>,
    pub r2: Vec<f64>,
}

impl MembraneResidual {
    /// All-zero residual for runs with a prescribed stress.
    pub fn zero(n_triangles: usize, n_edges: usize) -> Self {
        Self {
            interior: vec![0.0; n_triangles],
            edges: vec![0.0; n_edges],
            r2: vec![0.0; n_triangles],
        }
    }
}

/// `R_{M,T}^2 = |f + div sigma|_T^2 + h_T^{-1} sum_E share |jump|_E^2`.
/// Boundary edges whose tag is not in `clamped` are traction free and
/// contribute `|n . sigma|^2` in full.
pub fn membrane_element_residual(
    space: &FeSpace,
    sigma: &StressField,
    load: &(dyn Fn([f64; 2]) -> [f64; 2] + Sync),
    clamped: &[String],
    variant: MembraneEdgeTerm,
) -> MembraneResidual {
    let mesh = space.mesh();
    let el = space.element();
    let interior = par::map_range(mesh.n_triangles(), |t| {
        let map = space.element_map(t);
        let mut acc = 0.0;
        for (xi, w) in el.quad.points.iter().zip(&el.quad.weights) {
            let f = load(map.to_physical(*xi));
            let d = sigma.divergence(t, *xi, &map);
            acc += w * map.det * ((f[0] + d[0]).powi(2) + (f[1] + d[1]).powi(2));
        }
        acc
    });
    let clamped_tags: Vec<usize> = clamped.iter().filter_map(|s| mesh.tag_index(s)).collect();
    let edges = par::map_range(mesh.n_edges(), |e| {
        let edge = &mesh.edges()[e];
        if edge.tag.is_some_and(|t| clamped_tags.contains(&t)) {
            return 0.0;
        }
        let n = edge.normal;
        let (pts, wts) = space.edge_quadrature(e);
        let side = |t: usize, x: [f64; 2]| -> Vec<f64> {
            let map = space.element_map(t);
            let xi = map.to_reference(x);
            match variant {
                MembraneEdgeTerm::TractionJump => sigma.eval(t, xi).apply(n).to_vec(),
                MembraneEdgeTerm::DivergenceJump => vec![dot(n, sigma.divergence(t, xi, &map))],
            }
        };
        let mut acc = 0.0;
        for (x, w) in pts.iter().zip(&wts) {
            let a = side(edge.plus, *x);
            let b = match edge.minus {
                Some(m) => side(m, *x),
                None => vec![0.0; a.len()],
            };
            acc += w * a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>();
        }
        acc
    });
    let r2 = (0..mesh.n_triangles())
        .map(|t| {
            let h = mesh.diameter(t);
            let jumps: f64 = mesh
                .triangle_edges(t)
                .iter()
                .map(|&e| if mesh.edges()[e].is_boundary() { edges[e] } else { 0.5 * edges[e] })
                .sum();
            interior[t] + jumps / h
        })
        .collect();
    MembraneResidual { interior, edges, r2 }
}

/// Stress of a membrane displacement evaluated directly, for checks.
pub fn membrane_stress_at(space: &FeSpace, u: &[f64], t: usize, xi: [f64; 2], mat: &Material) -> Sym2 {
    let map = space.element_map(t);
    let table = space.table(&[xi], 1);
    let gx = field_derivative(&table, &map, &space.local_coefficients(t, u, 0), 1, 0);
    let gy = field_derivative(&table, &map, &space.local_coefficients(t, u, 1), 1, 0);
    let eps = Sym2::new(gx[0], 0.5 * (gx[1] + gy[0]), gy[1]);
    membrane_stress(eps, mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::membrane::{solve_membrane, stress_from_displacement};
    use crate::mesh::{build_lshape, Mesh, LSHAPE_TAGS};
    use std::sync::Arc;

    fn material() -> Material {
        Material::new(1.0, 0.25, 1.0).unwrap()
    }

    #[test]
    fn smooth_quadratic_has_no_jumps() {
        let mesh = Arc::new(build_lshape(2).unwrap());
        let space = FeSpace::scalar(mesh, 2).unwrap();
        let u = space.interpolate(|p| 0.2 * p[0] * p[0] - p[0] * p[1] + 0.4 * p[1] * p[1]);
        let res = plate_element_residual(&space, &u, 1.0, &StressField::Constant(Sym2::IDENTITY), &material(), &PlateOptions::default(), JumpWeight::Penalty);
        for (e, j) in res.edges.iter().enumerate() {
            if !space.mesh().edges()[e].is_boundary() {
                assert!(j.shear < 1e-20 && j.moment < 1e-20 && j.gradient < 1e-20, "{j:?}");
            }
        }
    }

    #[test]
    fn p2_interior_term_is_geometric_source() {
        // k = 2, constant Sigma: interior term is |lambda t Sigma : H U|^2
        let mesh = Arc::new(build_lshape(1).unwrap());
        let space = FeSpace::scalar(mesh, 2).unwrap();
        let u = space.interpolate(|p| p[0] * p[1] + 0.5 * p[0] * p[0]);
        let s = Sym2::new(1.0, 0.3, 2.0);
        let res = plate_element_residual(&space, &u, 2.0, &StressField::Constant(s), &material(), &PlateOptions::default(), JumpWeight::Penalty);
        let h = Sym2::new(1.0, 1.0, 0.0);
        for t in 0..6 {
            let want = (2.0 * s.ddot(&h)).powi(2) * space.mesh().area(t);
            assert!((res.interior[t] - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn interior_edge_split_between_neighbours() {
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let mesh = Arc::new(Mesh::new(verts, vec![[0, 1, 2], [0, 2, 3]], &[]).unwrap());
        let space = FeSpace::scalar(mesh.clone(), 2).unwrap();
        let u = space.interpolate(|p| (p[0] * (1.0 - p[1])).powi(2) + p[1] * p[1]);
        let opts = PlateOptions::default();
        let mat = material();
        let res = plate_element_residual(&space, &u, 0.0, &StressField::zero(), &mat, &opts, JumpWeight::Penalty);
        let e = (0..mesh.n_edges()).find(|&e| !mesh.edges()[e].is_boundary()).unwrap();
        let j = res.edges[e];
        let pen = opts.penalty(&mat);
        let edge = &mesh.edges()[e];
        let full = |h: f64| j.shear / h + j.moment / h.powi(3) + pen * pen * j.gradient / edge.h_e.powi(5);
        let boundary_part = |t: usize| -> f64 {
            let h = mesh.diameter(t);
            mesh.triangle_edges(t)
                .iter()
                .filter(|&&b| b != e)
                .map(|&b| {
                    let jb = res.edges[b];
                    jb.shear / h + jb.moment / h.powi(3) + pen * pen * jb.gradient / mesh.edges()[b].h_e.powi(5)
                })
                .sum()
        };
        let received: f64 = (0..2).map(|t| res.r2[t] - res.interior[t] - boundary_part(t)).sum();
        // both triangles share the same diameter here
        assert!((received - full(mesh.diameter(0))).abs() <= 1e-12 * full(mesh.diameter(0)));
        assert!(j.gradient > 0.0);
    }

    #[test]
    fn linear_membrane_field_has_zero_residual() {
        let mesh = Arc::new(build_lshape(2).unwrap());
        let space = FeSpace::vector(mesh, 2).unwrap();
        let mat = material();
        let g = |p: [f64; 2]| [0.3 * p[0] - 0.1 * p[1], 0.2 * p[0] + 0.5 * p[1]];
        let all: Vec<String> = LSHAPE_TAGS.iter().map(|s| s.to_string()).collect();
        let u = solve_membrane(&space, &mat, &|_| [0.0, 0.0], &all, Some(&g)).unwrap();
        let s = stress_from_displacement(&u, &space, &mat).unwrap();
        let r = membrane_element_residual(&space, &s, &|_| [0.0, 0.0], &all, MembraneEdgeTerm::TractionJump);
        assert!(r.r2.iter().all(|&v| v <= 1e-20), "{:?}", r.r2);
        let direct = membrane_stress_at(&space, &u, 3, [0.2, 0.2], &mat);
        assert!((direct - s.eval(3, [0.2, 0.2])).max_abs() < 1e-13);
    }

    #[test]
    fn p1_constant_load_interior_term() {
        let mesh = Arc::new(build_lshape(1).unwrap());
        let space = FeSpace::vector(mesh.clone(), 1).unwrap();
        let mat = material();
        let u = space.interpolate_vector(|p| [p[0] * p[1], p[0]]);
        let s = stress_from_displacement(&u, &space, &mat).unwrap();
        let f = [0.7, -0.2];
        let r = membrane_element_residual(&space, &s, &|_| f, &[], MembraneEdgeTerm::TractionJump);
        for t in 0..mesh.n_triangles() {
            let want = mesh.area(t) * (f[0] * f[0] + f[1] * f[1]);
            assert!((r.interior[t] - want).abs() < 1e-14);
        }
    }
}
