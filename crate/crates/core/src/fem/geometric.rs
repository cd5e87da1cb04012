//! Geometric stiffness, Laplace and mass operators on scalar spaces.

use super::basis::PhysTable;
use super::material::Sym2;
use super::space::FeSpace;
use super::sparse::{LocalBlock, SparseOperator};
use super::stress::StressField;
use crate::error::{Error, Result};
use crate::par;

fn scalar_blocks(space: &FeSpace, kernel: impl Fn(usize, usize, &PhysTable, usize, usize) -> f64 + Sync + Send) -> Vec<LocalBlock> {
    let el = space.element();
    let n = space.n_local();
    par::map_range(space.mesh().n_triangles(), |t| {
        let map = space.element_map(t);
        let phys = PhysTable::new(&el.quad_table, &map, 1);
        let mut block = LocalBlock::zeros(space.cell_dofs(t));
        for (q, w) in el.quad.weights.iter().enumerate() {
            let w = w * map.det;
            for i in 0..n {
                for j in 0..n {
                    block.add(i, j, w * kernel(t, q, &phys, i, j));
                }
            }
        }
        block
    })
}

fn check_scalar(space: &FeSpace) -> Result<()> {
    if space.components() != 1 {
        return Err(Error::param("space", "operator needs a scalar space"));
    }
    Ok(())
}

/// `G_ij = t (Sigma grad phi_j, grad phi_i)`.
pub fn assemble_geometric(space: &FeSpace, sigma: &StressField, t: f64) -> Result<SparseOperator> {
    check_scalar(space)?;
    if let StressField::Polynomial { coeffs, .. } = sigma {
        if coeffs.len() != space.mesh().n_triangles() {
            return Err(Error::LengthMismatch {
                name: "stress field".into(),
                expected: space.mesh().n_triangles(),
                actual: coeffs.len(),
            });
        }
    }
    let points = &space.element().quad.points;
    let blocks = scalar_blocks(space, |tri, q, phys, i, j| {
        let s: Sym2 = sigma.eval(tri, points[q]);
        let gi = phys.grad(q, i);
        let sj = s.apply(phys.grad(q, j));
        t * (sj[0] * gi[0] + sj[1] * gi[1])
    });
    Ok(SparseOperator::from_blocks(space.n_dofs(), &blocks, true))
}

/// `(grad phi_j, grad phi_i)`.
pub fn assemble_laplace(space: &FeSpace) -> Result<SparseOperator> {
    assemble_geometric(space, &StressField::Constant(Sym2::IDENTITY), 1.0)
}

/// `(phi_j, phi_i)`.
pub fn assemble_mass(space: &FeSpace) -> Result<SparseOperator> {
    check_scalar(space)?;
    let blocks = scalar_blocks(space, |_, q, phys, i, j| phys.value(q, i) * phys.value(q, j));
    Ok(SparseOperator::from_blocks(space.n_dofs(), &blocks, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_unit_square;
    use std::sync::Arc;

    #[test]
    fn unit_stress_gives_laplacian_with_zero_row_sums() {
        let mesh = Arc::new(build_unit_square(2).unwrap());
        let space = FeSpace::scalar(mesh, 2).unwrap();
        let g = assemble_geometric(&space, &StressField::Constant(Sym2::IDENTITY), 1.0).unwrap();
        let l = assemble_laplace(&space).unwrap();
        assert_eq!(g, l);
        let ones = vec![1.0; space.n_dofs()];
        assert!(g.mul(&ones).iter().all(|v| v.abs() < 1e-13));
        let x = space.interpolate(|p| p[0] * p[1]);
        assert!(g.form(&x, &x) > 0.0);
        // int |grad(x y)|^2 = int x^2 + y^2 = 2/3
        assert!((g.form(&x, &x) - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn zero_stress_gives_zero() {
        let mesh = Arc::new(build_unit_square(2).unwrap());
        let space = FeSpace::scalar(mesh, 2).unwrap();
        let g = assemble_geometric(&space, &StressField::zero(), 1.0).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn mass_integrates_products() {
        let mesh = Arc::new(build_unit_square(3).unwrap());
        let space = FeSpace::scalar(mesh, 3).unwrap();
        let m = assemble_mass(&space).unwrap();
        let ones = vec![1.0; space.n_dofs()];
        assert!((m.form(&ones, &ones) - 1.0).abs() < 1e-13);
        let x = space.interpolate(|p| p[0]);
        assert!((m.form(&x, &x) - 1.0 / 3.0).abs() < 1e-13);
    }
}
