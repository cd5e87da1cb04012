//! Dual problems on an enriched space and the weights derived from them.

use std::sync::Arc;

use log::warn;

use super::Target;
use crate::eigen::minres::{minres, MinresOptions};
use crate::eigen::{factor_spd, smallest_eigenpairs, EigenOptions};
use crate::error::{Error, Result};
use crate::fem::basis::field_derivative;
use crate::fem::material::Sym2;
use crate::fem::membrane::{assemble_elasticity, membrane_constraints};
use crate::fem::{
    assemble_geometric, assemble_laplace, assemble_mass, assemble_plate, plate_constraints, FeSpace, Material,
    PlateOptions, StressField,
};
use crate::mesh::bisect;
use crate::par;

/// How the dual space is made richer than the primal one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Enrichment {
    /// Same mesh, degree `k + 1`.
    #[default]
    DegreeElevation,
    /// Same degree, every triangle bisected twice.
    UniformRefinement,
}

impl Enrichment {
    pub fn name(self) -> &'static str {
        match self {
            Enrichment::DegreeElevation => "degree",
            Enrichment::UniformRefinement => "refined",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "degree" => Some(Enrichment::DegreeElevation),
            "refined" => Some(Enrichment::UniformRefinement),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualKind {
    Plate,
    Membrane,
}

/// Dual solution on an enriched space.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub which: DualKind,
    pub target: Target,
    pub enrichment: Enrichment,
    pub space: FeSpace,
    /// Full coefficient vector on `space`.
    pub coefficients: Vec<f64>,
    /// Primal triangle containing each enriched triangle.
    pub parent: Vec<usize>,
    /// Relative residual of the discrete dual system.
    pub residual: f64,
    /// Plate duals: the primal eigenvector carried to `space`.
    pub primal: Vec<f64>,
    /// Plate duals: enriched eigenvalue.
    pub lambda_hat: f64,
}

/// Primal plate data the duals are built from.
#[derive(Debug, Clone, Copy)]
pub struct PlateDualInput<'a> {
    pub space: &'a FeSpace,
    /// Full primal eigenvector, `U^T K U = 1`.
    pub u: &'a [f64],
    pub lambda_hat: f64,
    /// Zero-based index of the primal mode among the computed ones.
    pub mode: usize,
    pub sigma: &'a StressField,
    pub mat: &'a Material,
    pub opts: &'a PlateOptions,
}

/// Enriched space of the given number of components with its parent map.
fn enrich(space: &FeSpace, enrichment: Enrichment) -> Result<(FeSpace, Vec<usize>)> {
    let mesh = space.mesh_arc();
    let k = space.degree();
    let build = |m: Arc<crate::mesh::Mesh>, k: usize| {
        if space.components() == 1 {
            FeSpace::scalar(m, k)
        } else {
            FeSpace::vector(m, k)
        }
    };
    match enrichment {
        Enrichment::DegreeElevation => Ok((build(mesh.clone(), k + 1)?, (0..mesh.n_triangles()).collect())),
        Enrichment::UniformRefinement => {
            let first = bisect(mesh, &(0..mesh.n_triangles()).collect::<Vec<_>>())?;
            let second = bisect(&first.mesh, &(0..first.mesh.n_triangles()).collect::<Vec<_>>())?;
            let parent = second.parent.iter().map(|&p| first.parent[p]).collect();
            Ok((build(Arc::new(second.mesh), k)?, parent))
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Plate dual for `target`. For the eigenvalue the dual is the enriched
/// eigenvector closest to the primal one; for eigenvector seminorms it
/// solves `(K - lambda G) phi = psi_m` with `phi` G-orthogonal to that
/// eigenvector.
pub fn solve_plate_dual(
    target: Target,
    input: &PlateDualInput,
    enrichment: Enrichment,
    eig: &EigenOptions,
) -> Result<DualSolution> {
    let (espace, parent) = enrich(input.space, enrichment)?;
    if espace.n_dofs() <= input.space.n_dofs() {
        return Err(Error::Enrichment);
    }
    let sigma = match enrichment {
        Enrichment::DegreeElevation => input.sigma.clone(),
        Enrichment::UniformRefinement => input.sigma.transfer(input.space.mesh(), espace.mesh(), &parent),
    };
    let part = plate_constraints(&espace)?;
    let k = part.restrict(&assemble_plate(&espace, input.mat, input.opts)?);
    let g = part.restrict(&assemble_geometric(&espace, &sigma, input.mat.t)?);
    let primal = espace.transfer_from(input.space, input.u, &parent);
    let u = part.reduce(&primal);

    let count = (input.mode + 3).min(part.n_free());
    let pairs = smallest_eigenpairs(&k, &g, count, eig)?;
    let ku = k.mul(&u);
    let (best, overlap) = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| (i, dot(&p.vector, &ku)))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("at least one pair");
    let pair = &pairs[best];
    let s = if overlap < 0.0 { -1.0 } else { 1.0 };
    let z: Vec<f64> = pair.vector.iter().map(|v| s * v).collect();
    let lambda = pair.lambda_hat;

    let (phi, residual) = match target.order() {
        None => (z, pair.residual_norm),
        Some(m) => {
            let e: Vec<f64> = z.iter().zip(&u).map(|(a, b)| a - b).collect();
            let op = if m == 0 {
                part.restrict(&assemble_mass(&espace)?)
            } else {
                part.restrict(&assemble_laplace(&espace)?)
            };
            let oe = op.mul(&e);
            let size = dot(&e, &oe);
            if !(size > 0.0) {
                return Err(Error::DegenerateVector(size));
            }
            let mut rhs: Vec<f64> = oe.iter().map(|v| v / size.sqrt()).collect();
            let gz = g.mul(&z);
            let zgz = dot(&z, &gz);
            let c = dot(&z, &rhs) / zgz;
            rhs.iter_mut().zip(&gz).for_each(|(r, v)| *r -= c * v);
            let fact = factor_spd(&k)?;
            let shift = lambda * lambda;
            let apply = |x: &[f64]| -> Vec<f64> {
                let kx = k.mul(x);
                let gx = g.mul(x);
                let proj = shift * dot(&gz, x);
                (0..x.len()).map(|i| kx[i] - lambda * gx[i] + proj * gz[i]).collect()
            };
            let (mut phi, _) = minres(apply, |r| fact.solve(r), &rhs, &MinresOptions::default())?;
            let c = dot(&gz, &phi) / zgz;
            phi.iter_mut().zip(&z).for_each(|(p, v)| *p -= c * v);
            let kp = k.mul(&phi);
            let gp = g.mul(&phi);
            let r: Vec<f64> = (0..phi.len()).map(|i| kp[i] - lambda * gp[i] - rhs[i]).collect();
            let res = norm(&r) / norm(&rhs);
            (phi, res)
        }
    };
    Ok(DualSolution {
        which: DualKind::Plate,
        target,
        enrichment,
        coefficients: part.expand(&phi),
        primal,
        space: espace,
        parent,
        residual,
        lambda_hat: lambda,
    })
}

/// Membrane dual: `a_M(v, phi_M) = lambda t (sigma_M(v) grad U, grad phi_P)`
/// for all enriched membrane fields `v` clamped on `clamped`.
pub fn solve_membrane_dual(
    plate: &DualSolution,
    membrane_degree: usize,
    clamped: &[String],
    lambda_hat: f64,
    mat: &Material,
) -> Result<DualSolution> {
    if plate.which != DualKind::Plate {
        return Err(Error::param("plate", "expected a plate dual"));
    }
    let mesh = plate.space.mesh_arc().clone();
    let degree = match plate.enrichment {
        Enrichment::DegreeElevation => membrane_degree + 1,
        Enrichment::UniformRefinement => membrane_degree,
    };
    let space = FeSpace::vector(mesh.clone(), degree)?;
    let ps = &plate.space;
    let el = space.element();
    let pel = ps.element();
    // plate and membrane share the mesh; both use quadrature exact for the
    // higher of the two degrees
    let quad = if pel.quad.points.len() >= el.quad.points.len() { &pel.quad } else { &el.quad };
    let mtable = space.table(&quad.points, 1);
    let ptable = ps.table(&quad.points, 1);
    let local = par::map_range(mesh.n_triangles(), |t| {
        let map = space.element_map(t);
        let cu = ps.local_coefficients(t, &plate.primal, 0);
        let cp = ps.local_coefficients(t, &plate.coefficients, 0);
        let nl = space.n_local();
        let mut vals = vec![0.0; 2 * nl];
        for (q, w) in quad.weights.iter().enumerate() {
            let gu = field_derivative(&ptable, &map, &cu, 1, q);
            let gp = field_derivative(&ptable, &map, &cp, 1, q);
            let s = Sym2::new(gp[0] * gu[0], 0.5 * (gp[0] * gu[1] + gp[1] * gu[0]), gp[1] * gu[1]);
            let tr = s.trace();
            let wq = w * map.det * lambda_hat * mat.t;
            for a in 0..nl {
                let g = map.gradient(mtable.get(1, q, a));
                // v = phi_a e_c: sigma(v) : S = 2 mu (S g)_c + lambda g_c tr S
                let sg = s.apply(g);
                for c in 0..2 {
                    vals[2 * a + c] += wq * (2.0 * mat.mu * sg[c] + mat.lambda * g[c] * tr);
                }
            }
        }
        vals
    });
    let mut rhs = vec![0.0; space.n_dofs()];
    for (t, vals) in local.iter().enumerate() {
        for (d, v) in space.cell_dofs(t).into_iter().zip(vals) {
            rhs[d] += v;
        }
    }
    let part = membrane_constraints(&space, clamped)?;
    let k = part.restrict(&assemble_elasticity(&space, mat.mu, mat.lambda)?);
    let b = part.reduce(&rhs);
    let x = factor_spd(&k)?.solve(&b);
    let bn = norm(&b);
    let residual = if bn == 0.0 {
        0.0
    } else {
        let kx = k.mul(&x);
        norm(&kx.iter().zip(&b).map(|(p, q)| p - q).collect::<Vec<_>>()) / bn
    };
    Ok(DualSolution {
        which: DualKind::Membrane,
        target: plate.target,
        enrichment: plate.enrichment,
        coefficients: part.expand(&x),
        space,
        parent: plate.parent.clone(),
        residual,
        primal: Vec::new(),
        lambda_hat,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `W_T = h_T^alpha |phi|_{N(T), alpha}` with `N(T)` the triangle and its
/// edge neighbours on the primal mesh `primal`. Seminorm orders are capped at
/// the dual's degree.
pub fn dwr_weights(dual: &DualSolution, primal: &crate::mesh::Mesh, alpha: f64) -> Vec<f64> {
    let space = &dual.space;
    let requested = alpha.round().max(0.0) as usize;
    let cap = space.degree().min(crate::fem::basis::MAX_DERIVATIVE);
    if requested > cap {
        warn!("seminorm order {requested} truncated to {cap}");
    }
    let order = requested.min(cap);
    let el = space.element();
    let local = par::map_range(space.mesh().n_triangles(), |t| {
        let map = space.element_map(t);
        let mut acc = 0.0;
        for c in 0..space.components() {
            let coeffs = space.local_coefficients(t, &dual.coefficients, c);
            for (q, w) in el.quad.weights.iter().enumerate() {
                let d = field_derivative(&el.quad_table, &map, &coeffs, order, q);
                let s: f64 = d.iter().enumerate().map(|(i, v)| binomial(order, i) * v * v).sum();
                acc += w * map.det * s;
            }
        }
        acc
    });
    let mut per_parent = vec![0.0; primal.n_triangles()];
    for (t, &p) in dual.parent.iter().enumerate() {
        per_parent[p] += local[t];
    }
    (0..primal.n_triangles())
        .map(|t| {
            let s: f64 = per_parent[t] + primal.edge_neighbors(t).map(|n| per_parent[n]).sum::<f64>();
            primal.diameter(t).powf(alpha) * s.sqrt()
        })
        .collect()
}

/// Zero-valued weights used when a dual part is absent.
pub fn zero_weights(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Sym2;
    use crate::mesh::{build_lshape, build_unit_square, LSHAPE_TAGS};

    fn material() -> Material {
        Material::new(1.0, 0.25, 1.0).unwrap()
    }

    fn primal(n: usize) -> (FeSpace, Vec<f64>, f64) {
        let mesh = Arc::new(build_unit_square(n).unwrap());
        let space = FeSpace::scalar(mesh, 2).unwrap();
        let mat = material();
        let part = plate_constraints(&space).unwrap();
        let k = part.restrict(&assemble_plate(&space, &mat, &PlateOptions::default()).unwrap());
        let g = part.restrict(&assemble_geometric(&space, &StressField::Constant(Sym2::IDENTITY), 1.0).unwrap());
        let p = smallest_eigenpairs(&k, &g, 1, &EigenOptions::default()).unwrap();
        (space.clone(), part.expand(&p[0].vector), p[0].lambda_hat)
    }

    fn input<'a>(space: &'a FeSpace, u: &'a [f64], lambda: f64, sigma: &'a StressField, mat: &'a Material, opts: &'a PlateOptions) -> PlateDualInput<'a> {
        PlateDualInput { space, u, lambda_hat: lambda, mode: 0, sigma, mat, opts }
    }

    #[test]
    fn eigenvalue_dual_is_enriched_eigenvector() {
        let (space, u, lambda) = primal(4);
        let mat = material();
        let sigma = StressField::Constant(Sym2::IDENTITY);
        let opts = PlateOptions::default();
        let d = solve_plate_dual(Target::Eigenvalue, &input(&space, &u, lambda, &sigma, &mat, &opts), Enrichment::DegreeElevation, &EigenOptions::default()).unwrap();
        assert_eq!(d.space.degree(), 3);
        assert!(d.residual <= 1e-9);
        assert!(d.lambda_hat < lambda);
        let ef = 8.0 * std::f64::consts::PI.powi(2) / 45.0;
        assert!((d.lambda_hat - ef).abs() < (lambda - ef).abs());
    }

    #[test]
    fn eigenvector_duals_are_orthogonal() {
        let (space, u, lambda) = primal(4);
        let mat = material();
        let sigma = StressField::Constant(Sym2::IDENTITY);
        let opts = PlateOptions::default();
        let inp = input(&space, &u, lambda, &sigma, &mat, &opts);
        let eig = EigenOptions::default();
        let z = solve_plate_dual(Target::Eigenvalue, &inp, Enrichment::DegreeElevation, &eig).unwrap();
        let g = assemble_geometric(&z.space, &sigma, 1.0).unwrap();
        for target in [Target::EigenvectorL2, Target::EigenvectorH1] {
            let d = solve_plate_dual(target, &inp, Enrichment::DegreeElevation, &eig).unwrap();
            assert!(d.residual <= 1e-9, "{}", d.residual);
            let o = g.form(&d.coefficients, &z.coefficients);
            assert!(o.abs() <= 1e-8, "{o}");
            assert!(norm(&d.coefficients) > 0.0);
        }
    }

    #[test]
    fn refined_enrichment() {
        let (space, u, lambda) = primal(3);
        let mat = material();
        let sigma = StressField::Constant(Sym2::IDENTITY);
        let opts = PlateOptions::default();
        let d = solve_plate_dual(Target::Eigenvalue, &input(&space, &u, lambda, &sigma, &mat, &opts), Enrichment::UniformRefinement, &EigenOptions::default()).unwrap();
        assert_eq!(d.space.degree(), 2);
        assert_eq!(d.space.mesh().n_triangles(), 4 * space.mesh().n_triangles());
        assert!(d.lambda_hat < lambda);
        let w = dwr_weights(&d, space.mesh(), 2.0);
        assert_eq!(w.len(), space.mesh().n_triangles());
        assert!(w.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn membrane_dual_vanishes_for_zero_plate_field() {
        let mesh = Arc::new(build_lshape(2).unwrap());
        let space = FeSpace::scalar(mesh.clone(), 3).unwrap();
        let phi = space.interpolate(|p| p[0] * p[1]);
        let dual = DualSolution {
            which: DualKind::Plate,
            target: Target::Eigenvalue,
            enrichment: Enrichment::DegreeElevation,
            primal: vec![0.0; space.n_dofs()],
            coefficients: phi,
            parent: (0..mesh.n_triangles()).collect(),
            residual: 0.0,
            lambda_hat: 1.0,
            space,
        };
        let clamped: Vec<String> = LSHAPE_TAGS.iter().map(|s| s.to_string()).collect();
        let m = solve_membrane_dual(&dual, 2, &clamped, 2.0, &material()).unwrap();
        assert!(m.coefficients.iter().all(|&v| v == 0.0));
        assert_eq!(m.residual, 0.0);
    }

    #[test]
    fn membrane_dual_solves_its_system() {
        let mesh = Arc::new(build_lshape(2).unwrap());
        let space = FeSpace::scalar(mesh.clone(), 3).unwrap();
        let dual = DualSolution {
            which: DualKind::Plate,
            target: Target::Eigenvalue,
            enrichment: Enrichment::DegreeElevation,
            primal: space.interpolate(|p| p[0] * (1.0 - p[0]) * p[1]),
            coefficients: space.interpolate(|p| (p[0] + 2.0 * p[1]).sin()),
            parent: (0..mesh.n_triangles()).collect(),
            residual: 0.0,
            lambda_hat: 1.0,
            space,
        };
        let clamped = vec!["bottom".to_string(), "left".to_string()];
        let m = solve_membrane_dual(&dual, 2, &clamped, 3.0, &material()).unwrap();
        assert!(m.residual <= 1e-9);
        assert!(norm(&m.coefficients) > 0.0);
        assert_eq!(m.space.components(), 2);
    }

    #[test]
    fn weights_vanish_for_low_degree_fields() {
        let mesh = Arc::new(build_lshape(2).unwrap());
        let space = FeSpace::scalar(mesh.clone(), 3).unwrap();
        let quad = space.interpolate(|p| 1.0 + p[0] * p[1] - p[1] * p[1]);
        let dual = DualSolution {
            which: DualKind::Plate,
            target: Target::Eigenvalue,
            enrichment: Enrichment::DegreeElevation,
            primal: vec![],
            coefficients: quad,
            parent: (0..mesh.n_triangles()).collect(),
            residual: 0.0,
            lambda_hat: 1.0,
            space: space.clone(),
        };
        assert!(dwr_weights(&dual, &mesh, 3.0).iter().all(|&w| w < 1e-12));
        assert!(dwr_weights(&dual, &mesh, 2.0).iter().all(|&w| w > 0.0));
        let zero = DualSolution { coefficients: vec![0.0; space.n_dofs()], ..dual };
        assert!(dwr_weights(&zero, &mesh, 2.0).iter().all(|&w| w == 0.0));
    }

    #[test]
    fn weights_scale_with_h() {
        // phi = x^3 on nested grids: |phi|_{3} density is constant, so the
        // summed weight scales like h^alpha times the neighbourhood area
        let alpha = 3.0;
        let w = |n: usize| {
            let mesh = Arc::new(build_unit_square(n).unwrap());
            let space = FeSpace::scalar(mesh.clone(), 3).unwrap();
            let dual = DualSolution {
                which: DualKind::Plate,
                target: Target::Eigenvalue,
                enrichment: Enrichment::DegreeElevation,
                primal: vec![],
                coefficients: space.interpolate(|p| p[0].powi(3)),
                parent: (0..mesh.n_triangles()).collect(),
                residual: 0.0,
                lambda_hat: 1.0,
                space,
            };
            let w = dwr_weights(&dual, &mesh, alpha);
            // interior triangles all have three neighbours
            let t = (0..mesh.n_triangles()).find(|&t| mesh.edge_neighbors(t).count() == 3).unwrap();
            w[t]
        };
        let (a, b) = (w(4), w(8));
        // h^alpha halves by 2^-3, the neighbourhood seminorm by 2^-1
        assert!((b / a - 2f64.powf(-alpha - 1.0)).abs() < 1e-10, "{}", b / a);
    }
}
