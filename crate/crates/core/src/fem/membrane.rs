//! Plane-stress membrane problem.

use super::basis::{monomials, PhysTable};
use super::material::{membrane_stress_lame, Material, Sym2};
use super::space::FeSpace;
use super::sparse::{DofPartition, LocalBlock, SparseOperator};
use super::stress::StressField;
use crate::eigen::factor_spd;
use crate::error::{Error, Result};
use crate::par;

/// Body force on the membrane.
pub type VectorFn<'a> = &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync);

fn check_vector(space: &FeSpace) -> Result<()> {
    if space.components() != 2 {
        return Err(Error::param("space", "membrane problem needs a two-component space"));
    }
    Ok(())
}

/// Symmetric gradient of component-`c` basis function with gradient `g`.
fn strain(c: usize, g: [f64; 2]) -> Sym2 {
    if c == 0 {
        Sym2::new(g[0], 0.5 * g[1], 0.0)
    } else {
        Sym2::new(0.0, 0.5 * g[0], g[1])
    }
}

/// Stiffness `(sigma(u), eps(v))` for Lamé parameters `(mu, lambda)`.
pub fn assemble_elasticity(space: &FeSpace, mu: f64, lambda: f64) -> Result<SparseOperator> {
    check_vector(space)?;
    let el = space.element();
    let n = space.n_local();
    let blocks = par::map_range(space.mesh().n_triangles(), |t| {
        let map = space.element_map(t);
        let phys = PhysTable::new(&el.quad_table, &map, 1);
        let mut block = LocalBlock::zeros(space.cell_dofs(t));
        for (q, w) in el.quad.weights.iter().enumerate() {
            let w = w * map.det;
            let eps: Vec<Sym2> = (0..2 * n).map(|a| strain(a % 2, phys.grad(q, a / 2))).collect();
            for b in 0..2 * n {
                let s = membrane_stress_lame(eps[b], mu, lambda);
                for a in 0..2 * n {
                    block.add(a, b, w * s.ddot(&eps[a]));
                }
            }
        }
        block
    });
    Ok(SparseOperator::from_blocks(space.n_dofs(), &blocks, true))
}

/// Load vector `(f, v)`.
pub fn assemble_load(space: &FeSpace, load: VectorFn) -> Result<Vec<f64>> {
    check_vector(space)?;
    let el = space.element();
    let n = space.n_local();
    let parts = par::map_range(space.mesh().n_triangles(), |t| {
        let map = space.element_map(t);
        let mut local = vec![0.0; 2 * n];
        for (q, (xi, w)) in el.quad.points.iter().zip(&el.quad.weights).enumerate() {
            let f = load(map.to_physical(*xi));
            let w = w * map.det;
            for i in 0..n {
                let phi = el.quad_table.get(0, q, i)[0];
                local[2 * i] += w * f[0] * phi;
                local[2 * i + 1] += w * f[1] * phi;
            }
        }
        local
    });
    let mut out = vec![0.0; space.n_dofs()];
    for (t, local) in parts.iter().enumerate() {
        for (d, v) in space.cell_dofs(t).into_iter().zip(local) {
            out[d] += v;
        }
    }
    Ok(out)
}

/// DOFs fixed on the clamped tags (both components).
pub fn membrane_constraints(space: &FeSpace, clamped: &[String]) -> Result<DofPartition> {
    let mut fixed = Vec::new();
    for tag in clamped {
        for c in 0..2 {
            fixed.extend(space.dirichlet_set(tag, c)?);
        }
    }
    DofPartition::new(space.n_dofs(), &fixed)
}

/// Assembled membrane system `(K_M, F_M)` before elimination.
pub fn assemble_membrane(
    space: &FeSpace,
    mat: &Material,
    load: VectorFn,
    clamped: &[String],
) -> Result<(SparseOperator, Vec<f64>)> {
    if clamped.is_empty() {
        return Err(Error::Assembly(
            "membrane problem without clamped boundary is singular".into(),
        ));
    }
    membrane_constraints(space, clamped)?;
    Ok((assemble_elasticity(space, mat.mu, mat.lambda)?, assemble_load(space, load)?))
}

/// Solves the membrane problem. Clamped DOFs take the values of
/// `boundary_value` (zero when absent).
pub fn solve_membrane(
    space: &FeSpace,
    mat: &Material,
    load: VectorFn,
    clamped: &[String],
    boundary_value: Option<VectorFn>,
) -> Result<Vec<f64>> {
    let (k, f) = assemble_membrane(space, mat, load, clamped)?;
    let part = membrane_constraints(space, clamped)?;
    let g = match boundary_value {
        Some(gf) => space.interpolate_vector(gf),
        None => vec![0.0; space.n_dofs()],
    };
    let rhs = part.lift(&k, &f, &g);
    let u = factor_spd(&part.restrict(&k))?.solve(&rhs);
    let mut full = part.expand(&u);
    for &d in part.constrained() {
        full[d] = g[d];
    }
    Ok(full)
}

/// Elementwise stress polynomial of degree `k - 1` from a displacement.
pub fn stress_from_displacement(u: &[f64], space: &FeSpace, mat: &Material) -> Result<StressField> {
    check_vector(space)?;
    if u.len() != space.n_dofs() {
        return Err(Error::LengthMismatch {
            name: "displacement".into(),
            expected: space.n_dofs(),
            actual: u.len(),
        });
    }
    let basis = &space.element().basis;
    let k = space.degree();
    let nm = monomials(k - 1).len();
    let dxi: Vec<Vec<f64>> = (0..basis.n_local()).map(|i| basis.derivative_coefficients(i, 1, 0)).collect();
    let deta: Vec<Vec<f64>> = (0..basis.n_local()).map(|i| basis.derivative_coefficients(i, 0, 1)).collect();
    let coeffs = par::map_range(space.mesh().n_triangles(), |t| {
        let map = space.element_map(t);
        let inv = map.inv;
        // grad[c][d][j]: coefficient j of d u_c / d x_d
        let mut grad = [[vec![0.0; nm], vec![0.0; nm]], [vec![0.0; nm], vec![0.0; nm]]];
        for (i, &s) in space.cell_nodes(t).iter().enumerate() {
            for c in 0..2 {
                let uc = u[2 * s + c];
                for j in 0..nm {
                    let (a, b) = (dxi[i][j], deta[i][j]);
                    grad[c][0][j] += uc * (inv[0][0] * a + inv[1][0] * b);
                    grad[c][1][j] += uc * (inv[0][1] * a + inv[1][1] * b);
                }
            }
        }
        let mut out = [vec![0.0; nm], vec![0.0; nm], vec![0.0; nm]];
        for j in 0..nm {
            let eps = Sym2::new(grad[0][0][j], 0.5 * (grad[0][1][j] + grad[1][0][j]), grad[1][1][j]);
            let s = membrane_stress_lame(eps, mat.mu, mat.lambda);
            out[0][j] = s.xx;
            out[1][j] = s.xy;
            out[2][j] = s.yy;
        }
        out
    });
    Ok(StressField::Polynomial { degree: k - 1, coeffs })
}
