//! Verification against closed-form loads and the dense eigensolver.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use crate::adapt::{adaptive_loop, membrane_stress, plate_eigenpairs};
use crate::config::{Geometry, MembraneLoad, RunConfig, StressMode};
use crate::eigen::oracle::dense_pencil;
use crate::eigen::{smallest_eigenpairs, EigenOptions};
use crate::error::{Error, Result};
use crate::fem::{assemble_geometric, assemble_plate, plate_constraints, FeSpace, PlateBc, SparseOperator};
use crate::io::presets::{preset, LSHAPE_THIRD};

/// First load of the simply supported unit square under unit stress with
/// `D = 4/45`: `D * 2 pi^2`.
pub const SQUARE_FIRST: f64 = 8.0 * PI * PI / 45.0;

pub const ORACLE_NAMES: [&str; 4] = ["pencil_small", "square_anchor", "lshape_third", "all"];

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// A small pencil together with a description of where it came from.
pub struct SmallPencil {
    pub label: String,
    pub k: SparseOperator,
    pub g: SparseOperator,
}

/// Plate pencils of every small mesh configuration used in the tests: both
/// geometries, both plate conditions, degrees 2 and 3, prescribed and solved
/// stress. All have at most 200 free DOFs.
pub fn small_pencils() -> Result<Vec<SmallPencil>> {
    let coupled = StressMode::FeDerived {
        load: MembraneLoad::CornerDistance {
            corner: [0.5, 0.5],
            scale: [1.0, -0.9],
        },
        clamped: ["reentrant_x", "bottom", "right", "reentrant_y"].map(String::from).to_vec(),
        degree: 2,
    };
    let mut cases = Vec::new();
    for (geometry, ns) in [(Geometry::Square, &[1usize, 2, 3, 4, 5][..]), (Geometry::LShape, &[1, 2, 3][..])] {
        for &n in ns {
            for degree in [2, 3] {
                for bc in [PlateBc::SimplySupported, PlateBc::Clamped] {
                    cases.push(RunConfig { geometry, n, plate_degree: degree, plate_bc: bc, ..RunConfig::default() });
                }
            }
        }
    }
    for n in [1, 2, 3] {
        cases.push(RunConfig { n, stress: coupled.clone(), ..RunConfig::default() });
    }
    let mut out = Vec::new();
    for cfg in cases {
        let mat = cfg.material()?;
        let mesh = Arc::new(cfg.geometry.build(cfg.n)?);
        let (sigma, _) = membrane_stress(&cfg, &mesh, &mat)?;
        let space = FeSpace::scalar(mesh, cfg.plate_degree)?;
        let part = plate_constraints(&space)?;
        if part.n_free() > 200 {
            continue;
        }
        let k = part.restrict(&assemble_plate(&space, &mat, &cfg.plate_options())?);
        let g = part.restrict(&assemble_geometric(&space, &sigma, mat.t)?);
        let stress = if cfg.stress.eq(&RunConfig::default().stress) { "unit" } else { "solved" };
        out.push(SmallPencil {
            label: format!(
                "{} n={} k={} {:?} {stress} ({} dofs)",
                cfg.geometry.name(),
                cfg.n,
                cfg.plate_degree,
                cfg.plate_bc,
                part.n_free()
            ),
            k,
            g,
        });
    }
    Ok(out)
}

/// Largest relative eigenvalue gap and largest normalized off-diagonal
/// `G`-product over the lowest `count` pairs of one pencil.
pub fn compare_with_dense(k: &SparseOperator, g: &SparseOperator, count: usize) -> Result<(f64, f64)> {
    let dense = dense_pencil(k, g)?;
    let count = count.min(dense.len());
    let pairs = smallest_eigenpairs(k, g, count, &EigenOptions::default())?;
    let gap = pairs
        .iter()
        .zip(&dense)
        .map(|(p, d)| (p.lambda_hat - d.0).abs() / d.0.abs())
        .fold(0.0, f64::max);
    let diag: Vec<f64> = pairs.iter().map(|p| g.form(&p.vector, &p.vector).abs()).collect();
    let mut orth = 0.0f64;
    for i in 0..count {
        for j in 0..i {
            let gij = g.form(&pairs[i].vector, &pairs[j].vector).abs();
            orth = orth.max(gij / (diag[i] * diag[j]).sqrt());
        }
    }
    Ok((gap, orth))
}

pub fn pencil_small() -> Result<Vec<Check>> {
    small_pencils()?
        .into_iter()
        .map(|p| {
            let (gap, orth) = compare_with_dense(&p.k, &p.g, 4)?;
            Ok(Check {
                name: format!("pencil_small {}", p.label),
                passed: gap <= 1e-8 && orth <= 1e-8,
                detail: format!("eigenvalue gap {gap:.2e}, G-orthogonality {orth:.2e} (limit 1e-8)"),
            })
        })
        .collect()
}

/// First load of the unit square on uniform meshes `n = 8, 16, 32` and the
/// observed orders between consecutive grids.
pub fn square_orders() -> Result<(Vec<f64>, Vec<f64>)> {
    let mut errors = Vec::new();
    for n in [8, 16, 32] {
        let cfg = RunConfig {
            geometry: Geometry::Square,
            n,
            eigen_count: 1,
            ..RunConfig::default()
        };
        let mat = cfg.material()?;
        let mesh = Arc::new(cfg.geometry.build(n)?);
        let (sigma, _) = membrane_stress(&cfg, &mesh, &mat)?;
        let space = FeSpace::scalar(mesh, cfg.plate_degree)?;
        let (pairs, _) = plate_eigenpairs(&cfg, &space, &sigma, &mat)?;
        errors.push((pairs[0].lambda_hat - SQUARE_FIRST).abs() / SQUARE_FIRST);
    }
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok((errors, orders))
}

pub fn square_anchor() -> Result<Check> {
    let (errors, orders) = square_orders()?;
    Ok(Check {
        name: "square_anchor".into(),
        passed: orders.iter().all(|&p| p >= 1.8),
        detail: format!(
            "relative errors {:.3e} {:.3e} {:.3e}, orders {:.2} {:.2} (need >= 1.8)",
            errors[0], errors[1], errors[2], orders[0], orders[1]
        ),
    })
}

/// First step within 1%: step, DOFs and relative error.
pub type Hit = (usize, usize, f64);

/// Adaptive run for the third L-shape load: the first step at which the
/// relative error is within 1%, if any, and the elapsed seconds.
pub fn lshape_third_run() -> Result<(Option<Hit>, f64)> {
    let cfg = RunConfig {
        max_steps: 10,
        max_dofs: 50_000,
        ..preset("lshape_unit_stress_3")?
    };
    let clock = Instant::now();
    let run = adaptive_loop(&cfg)?;
    let seconds = clock.elapsed().as_secs_f64();
    let hit = run.records.iter().find_map(|r| {
        let err = (r.target_lambda() - LSHAPE_THIRD).abs() / LSHAPE_THIRD;
        (err <= 0.01 && r.n_dofs <= 50_000).then_some((r.step, r.n_dofs, err))
    });
    Ok((hit, seconds))
}

pub fn lshape_third() -> Result<Check> {
    let (hit, seconds) = lshape_third_run()?;
    let detail = match hit {
        Some((step, dofs, err)) => format!("error {:.3}% at step {step} ({dofs} dofs), {seconds:.1} s", 100.0 * err),
        None => format!("error above 1% through step 10 or 5e4 dofs, {seconds:.1} s"),
    };
    Ok(Check {
        name: "lshape_third".into(),
        passed: hit.is_some() && seconds <= 120.0,
        detail,
    })
}

/// Runs the named oracle; `all` runs every one.
pub fn oracle(name: &str) -> Result<Vec<Check>> {
    match name {
        "pencil_small" => pencil_small(),
        "square_anchor" => Ok(vec![square_anchor()?]),
        "lshape_third" => Ok(vec![lshape_third()?]),
        "all" => {
            let mut out = pencil_small()?;
            out.push(square_anchor()?);
            out.push(lshape_third()?);
            Ok(out)
        }
        _ => Err(Error::ConfigValue {
            field: "oracle".into(),
            message: format!("unknown oracle `{name}` (valid: {})", ORACLE_NAMES.join(", ")),
        }),
    }
}
