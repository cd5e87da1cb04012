//! Continuous/discontinuous Galerkin bending form for Kirchhoff plates.
//!
//! With `theta = grad u` the form reads
//!
//! ```text
//! A(u, v) = sum_T (sigma(H u), H v)_T
//!         - sum_E (<n . sigma(H u)>, [grad v])_E
//!         - sum_E ([grad u], <n . sigma(H v)>)_E
//!         + sum_E beta gamma / h_E ([grad u], [grad v])_E
//! ```
//!
//! where `[w] = w+ - w-` and `<w> = (w+ + w-)/2` on interior edges, and
//! `[w] = w+`, `<w> = w+` on boundary edges.

use super::basis::PhysTable;
use super::material::{plate_stress, Material, Sym2};
use super::space::FeSpace;
use super::sparse::{DofPartition, LocalBlock, SparseOperator};
use crate::error::{Error, Result};
use crate::par;

/// Plate boundary condition. Deflection is always fixed strongly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlateBc {
    /// Free rotation: boundary edges carry no edge terms.
    #[default]
    SimplySupported,
    /// Rotation fixed weakly through boundary edge terms.
    Clamped,
}

/// Modulus multiplying `gamma / h_E` in the penalty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PenaltyModulus {
    /// `2 mu_P + 2 lambda_P = D (1 + nu)` from the plate law.
    #[default]
    Plate,
    /// `2 mu + 2 lambda` from the membrane Lamé parameters.
    Membrane,
    /// Explicit value.
    Value(f64),
}

impl PenaltyModulus {
    pub fn value(&self, mat: &Material) -> f64 {
        match *self {
            PenaltyModulus::Plate => {
                let (mu_p, lambda_p) = mat.plate_lame();
                2.0 * mu_p + 2.0 * lambda_p
            }
            PenaltyModulus::Membrane => 2.0 * mat.mu + 2.0 * mat.lambda,
            PenaltyModulus::Value(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateOptions {
    pub gamma: f64,
    pub bc: PlateBc,
    pub modulus: PenaltyModulus,
}

impl Default for PlateOptions {
    fn default() -> Self {
        Self {
            gamma: 10.0,
            bc: PlateBc::SimplySupported,
            modulus: PenaltyModulus::Plate,
        }
    }
}

impl PlateOptions {
    pub fn new(gamma: f64, bc: PlateBc) -> Self {
        Self {
            gamma,
            bc,
            ..Self::default()
        }
    }

    /// `beta * gamma`.
    pub fn penalty(&self, mat: &Material) -> f64 {
        self.modulus.value(mat) * self.gamma
    }

    pub fn check(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma", format!("penalty parameter must be positive, got {}", self.gamma)));
        }
        if let PenaltyModulus::Value(v) = self.modulus {
            if !(v > 0.0) {
                return Err(Error::param("penalty_modulus", format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// True when boundary edges enter the edge sums.
    pub fn uses_boundary_edges(&self) -> bool {
        self.bc == PlateBc::Clamped
    }
}

fn check_space(space: &FeSpace) -> Result<()> {
    if space.components() != 1 {
        return Err(Error::param("space", "plate form needs a scalar space"));
    }
    if space.degree() < 2 {
        return Err(Error::param("degree", format!("plate form needs degree >= 2, got {}", space.degree())));
    }
    Ok(())
}

fn hessian(p: &PhysTable, q: usize, i: usize) -> Sym2 {
    p.hessian(q, i)
}

/// Element contributions `(sigma_P(H u), H v)_T` only.
pub fn plate_element_blocks(space: &FeSpace, mat: &Material) -> Vec<LocalBlock> {
    let el = space.element();
    let n = space.n_local();
    par::map_range(space.mesh().n_triangles(), |t| {
        let map = space.element_map(t);
        let phys = PhysTable::new(&el.quad_table, &map, 2);
        let mut block = LocalBlock::zeros(space.cell_dofs(t));
        for (q, w) in el.quad.weights.iter().enumerate() {
            let w = w * map.det;
            let h: Vec<Sym2> = (0..n).map(|i| hessian(&phys, q, i)).collect();
            for j in 0..n {
                let s = plate_stress(h[j], mat);
                for i in 0..n {
                    block.add(i, j, w * s.ddot(&h[i]));
                }
            }
        }
        block
    })
}

/// Per-side data of an edge: DOFs, jump sign and average weight.
struct Side {
    dofs: Vec<usize>,
    phys: PhysTable,
    jump_sign: f64,
    avg_weight: f64,
}

fn edge_sides(space: &FeSpace, e: usize) -> Vec<Side> {
    let edge = &space.mesh().edges()[e];
    match edge.minus {
        Some(m) => vec![
            Side {
                dofs: space.cell_dofs(edge.plus),
                phys: space.edge_phys(e, edge.plus, 2),
                jump_sign: 1.0,
                avg_weight: 0.5,
            },
            Side {
                dofs: space.cell_dofs(m),
                phys: space.edge_phys(e, m, 2),
                jump_sign: -1.0,
                avg_weight: 0.5,
            },
        ],
        None => vec![Side {
            dofs: space.cell_dofs(edge.plus),
            phys: space.edge_phys(e, edge.plus, 2),
            jump_sign: 1.0,
            avg_weight: 1.0,
        }],
    }
}

/// Edges entering the edge sums for the given boundary condition.
pub fn active_edges(space: &FeSpace, bc: PlateBc) -> Vec<usize> {
    let mesh = space.mesh();
    (0..mesh.n_edges())
        .filter(|&e| bc == PlateBc::Clamped || !mesh.edges()[e].is_boundary())
        .collect()
}

/// Consistency and penalty contributions of the active edges.
pub fn plate_edge_blocks(space: &FeSpace, mat: &Material, opts: &PlateOptions) -> Vec<LocalBlock> {
    let edges = active_edges(space, opts.bc);
    let penalty = opts.penalty(mat);
    let el = space.element();
    par::map_slice(&edges, |&e| {
        let edge = &space.mesh().edges()[e];
        let n = edge.normal;
        let sides = edge_sides(space, e);
        let dofs: Vec<usize> = sides.iter().flat_map(|s| s.dofs.iter().copied()).collect();
        let m = dofs.len();
        let mut block = LocalBlock::zeros(dofs);
        let pen = penalty / edge.h_e;
        for (q, w) in el.edge_weights.iter().enumerate() {
            let w = w * edge.length;
            let mut jump = Vec::with_capacity(m);
            let mut avg = Vec::with_capacity(m);
            for s in &sides {
                for i in 0..s.dofs.len() {
                    let g = s.phys.grad(q, i);
                    jump.push([s.jump_sign * g[0], s.jump_sign * g[1]]);
                    let sn = plate_stress(s.phys.hessian(q, i), mat).apply(n);
                    avg.push([s.avg_weight * sn[0], s.avg_weight * sn[1]]);
                }
            }
            let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
            for i in 0..m {
                for j in 0..m {
                    let v = -dot(avg[j], jump[i]) - dot(jump[j], avg[i]) + pen * dot(jump[j], jump[i]);
                    block.add(i, j, w * v);
                }
            }
        }
        block
    })
}

/// Full (unconstrained) plate operator.
pub fn assemble_plate(space: &FeSpace, mat: &Material, opts: &PlateOptions) -> Result<SparseOperator> {
    check_space(space)?;
    opts.check()?;
    let mut blocks = plate_element_blocks(space, mat);
    blocks.extend(plate_edge_blocks(space, mat, opts));
    Ok(SparseOperator::from_blocks(space.n_dofs(), &blocks, true))
}

/// Plate operator with the default penalty modulus.
pub fn assemble_plate_cdg(space: &FeSpace, mat: &Material, gamma: f64, bc: PlateBc) -> Result<SparseOperator> {
    assemble_plate(space, mat, &PlateOptions::new(gamma, bc))
}

/// Deflection constraints: every boundary DOF.
pub fn plate_constraints(space: &FeSpace) -> Result<DofPartition> {
    DofPartition::new(space.n_dofs(), &space.boundary_dofs())
}

/// Load vector of the weakly imposed rotation `grad u = g` on boundary
/// edges of a clamped plate:
/// `-(g, n . sigma(H v))_E + beta gamma / h_E (g, grad v)_E`.
pub fn plate_rotation_load(
    space: &FeSpace,
    mat: &Material,
    opts: &PlateOptions,
    g: impl Fn([f64; 2]) -> [f64; 2],
) -> Result<Vec<f64>> {
    check_space(space)?;
    opts.check()?;
    let mut out = vec![0.0; space.n_dofs()];
    if opts.bc != PlateBc::Clamped {
        return Ok(out);
    }
    let penalty = opts.penalty(mat);
    let el = space.element();
    for (e, edge) in space.mesh().edges().iter().enumerate() {
        if !edge.is_boundary() {
            continue;
        }
        let (pts, wts) = space.edge_quadrature(e);
        let phys = space.edge_phys(e, edge.plus, 2);
        let dofs = space.cell_dofs(edge.plus);
        for q in 0..el.edge_weights.len() {
            let gq = g(pts[q]);
            for (i, &d) in dofs.iter().enumerate() {
                let sn = plate_stress(phys.hessian(q, i), mat).apply(edge.normal);
                let gr = phys.grad(q, i);
                let v = -(gq[0] * sn[0] + gq[1] * sn[1]) + penalty / edge.h_e * (gq[0] * gr[0] + gq[1] * gr[1]);
                out[d] += wts[q] * v;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::factor_spd;
    use crate::mesh::{bisect, build_lshape, build_unit_square};
    use std::sync::Arc;

    fn material() -> Material {
        Material::new(1.0, 0.25, 1.0).unwrap()
    }

    #[test]
    fn default_penalty_modulus() {
        let m = material();
        let opts = PlateOptions::default();
        assert!((opts.modulus.value(&m) - m.d * 1.25).abs() < 1e-15);
        assert!((PenaltyModulus::Membrane.value(&m) - 2.0 * (0.4 + 4.0 / 15.0)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_on_lshape() {
        let mesh = Arc::new(build_lshape(2).unwrap());
        let space = FeSpace::scalar(mesh, 2).unwrap();
        for bc in [PlateBc::Clamped, PlateBc::SimplySupported] {
            let k = assemble_plate_cdg(&space, &material(), 10.0, bc).unwrap();
            assert!(k.symmetry_error() <= 1e-12 * k.max_abs());
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mesh = Arc::new(build_unit_square(1).unwrap());
        let p2 = FeSpace::scalar(mesh.clone(), 2).unwrap();
        assert!(assemble_plate_cdg(&p2, &material(), 0.0, PlateBc::Clamped).is_err());
        assert!(assemble_plate_cdg(&p2, &material(), -1.0, PlateBc::Clamped).is_err());
        let p1 = FeSpace::scalar(mesh, 1).unwrap();
        assert!(assemble_plate_cdg(&p1, &material(), 10.0, PlateBc::Clamped).is_err());
    }

    #[test]
    fn coercive_on_coarse_lshape() {
        let mesh = Arc::new(build_lshape(1).unwrap());
        let space = FeSpace::scalar(mesh, 2).unwrap();
        let part = plate_constraints(&space).unwrap();
        for bc in [PlateBc::Clamped, PlateBc::SimplySupported] {
            let k = part.restrict(&assemble_plate_cdg(&space, &material(), 10.0, bc).unwrap());
            let ev = k.to_dense().symmetric_eigenvalues();
            assert!(ev.min() > 0.0, "{bc:?}: {}", ev.min());
        }
    }

    #[test]
    fn quadratic_jumps_vanish() {
        // interior rows only see element integrals for a global quadratic
        let mesh = Arc::new(bisect(&build_unit_square(4).unwrap(), &[1, 12, 13]).unwrap().mesh);
        let space = FeSpace::scalar(mesh, 2).unwrap();
        let w = space.interpolate(|p| 0.3 * p[0] * p[0] - p[0] * p[1] + 2.0 * p[1] * p[1] + p[0]);
        let mat = material();
        let opts = PlateOptions::default();
        let edge_only = SparseOperator::from_blocks(space.n_dofs(), &plate_edge_blocks(&space, &mat, &opts), true);
        let full = assemble_plate(&space, &mat, &opts).unwrap();
        let elem = SparseOperator::from_blocks(space.n_dofs(), &plate_element_blocks(&space, &mat), true);
        // penalty and one consistency term vanish; the other cancels the
        // boundary terms of the element integrals on interior DOFs
        let a = full.mul(&w);
        let b = elem.mul(&w);
        let c = edge_only.mul(&w);
        for i in 0..space.n_dofs() {
            assert!((a[i] - b[i] - c[i]).abs() < 1e-11, "{} {} {}", a[i], b[i], c[i]);
        }
        let mesh = space.mesh();
        let mut near_boundary = vec![false; space.n_dofs()];
        for t in 0..mesh.n_triangles() {
            if mesh.triangle_edges(t).iter().any(|&e| mesh.edges()[e].is_boundary()) {
                for d in space.cell_dofs(t) {
                    near_boundary[d] = true;
                }
            }
        }
        let mut checked = 0;
        for d in (0..space.n_dofs()).filter(|&d| !near_boundary[d]) {
            assert!(a[d].abs() < 1e-11, "row {d}: {}", a[d]);
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn clamped_quadratic_patch_test() {
        let mesh = Arc::new(bisect(&build_lshape(2).unwrap(), &[0, 5, 9]).unwrap().mesh);
        let space = FeSpace::scalar(mesh, 2).unwrap();
        let mat = material();
        let opts = PlateOptions::new(10.0, PlateBc::Clamped);
        let f = |p: [f64; 2]| 1.0 + p[0] - 2.0 * p[1] + 0.5 * p[0] * p[0] + 0.7 * p[0] * p[1] - p[1] * p[1];
        let grad = |p: [f64; 2]| [1.0 + p[0] + 0.7 * p[1], -2.0 + 0.7 * p[0] - 2.0 * p[1]];
        let w = space.interpolate(f);
        let k = assemble_plate(&space, &mat, &opts).unwrap();
        let load = plate_rotation_load(&space, &mat, &opts, grad).unwrap();
        let part = plate_constraints(&space).unwrap();
        let rhs = part.lift(&k, &load, &w);
        let u = factor_spd(&part.restrict(&k)).unwrap().solve(&rhs);
        let exact = part.reduce(&w);
        let err = u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err <= 1e-9 * scale, "{err}");
    }
}
