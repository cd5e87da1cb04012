//! Fixed-ratio marking and the adaptive solve-estimate-mark-refine loop.

use std::sync::Arc;
use std::time::Instant;

use log::info;

use crate::config::{RunConfig, StressMode};
use crate::eigen::{smallest_eigenpairs, EigenPair};
use crate::error::{Error, Result};
use crate::estimator::{
    dwr_estimate, dwr_weights, effectivity_index, membrane_element_residual, plate_element_residual,
    residual_estimate, solve_membrane_dual, solve_plate_dual, EstimatorMode, IndicatorSet, PlateDualInput,
};
use crate::fem::{
    assemble_geometric, assemble_plate, plate_constraints, solve_membrane, stress_from_displacement, FeSpace,
    Material, StressField,
};
use crate::mesh::{bisect, Mesh};

/// Marks the `ceil(fraction N)` elements with the largest `eta`, lower index
/// first on ties. The result is sorted ascending.
pub fn mark_fixed_ratio(eta: &[f64], fraction: f64) -> Result<Vec<usize>> {
    if eta.is_empty() {
        return Err(Error::param("eta", "indicator set is empty"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param("fraction", format!("must lie in (0, 1], got {fraction}")));
    }
    let count = ((fraction * eta.len() as f64).ceil() as usize).clamp(1, eta.len());
    let mut order: Vec<usize> = (0..eta.len()).collect();
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]).then(a.cmp(&b)));
    let mut marked = order[..count].to_vec();
    marked.sort_unstable();
    Ok(marked)
}

/// One row of the run history.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptRecord {
    pub step: usize,
    pub n_dofs: usize,
    pub n_elements: usize,
    /// Computed eigenvalues, ascending.
    pub lambdas: Vec<f64>,
    /// Zero-based position of the tracked target in `lambdas`.
    pub tracked: usize,
    pub estimate: f64,
    pub plate_estimate: f64,
    pub membrane_estimate: f64,
    pub effectivity: Option<f64>,
    pub seconds: Option<f64>,
}

impl AdaptRecord {
    pub fn target_lambda(&self) -> f64 {
        self.lambdas[self.tracked]
    }
}

/// Membrane solution of one step.
#[derive(Debug, Clone)]
pub struct MembraneState {
    pub space: FeSpace,
    pub displacement: Vec<f64>,
    /// Physical stress `sigma_M(u_M)`.
    pub stress: StressField,
}

/// Everything computed on one mesh.
#[derive(Debug, Clone)]
pub struct StepState {
    pub step: usize,
    pub mesh: Arc<Mesh>,
    pub space: FeSpace,
    pub sigma: StressField,
    pub membrane: Option<MembraneState>,
    pub pairs: Vec<EigenPair>,
    /// Full-length eigenvectors on `space`.
    pub modes: Vec<Vec<f64>>,
    pub tracked: usize,
    pub indicators: IndicatorSet,
}

#[derive(Debug, Clone)]
pub struct AdaptRun {
    pub records: Vec<AdaptRecord>,
    pub last: StepState,
}

/// Stress entering the pencil on `mesh`. A solved membrane field enters with
/// compression positive, so the pencil sees `-sigma_M`; a prescribed tensor
/// is used as given.
pub fn membrane_stress(
    cfg: &RunConfig,
    mesh: &Arc<Mesh>,
    mat: &Material,
) -> Result<(StressField, Option<MembraneState>)> {
    match &cfg.stress {
        StressMode::Prescribed(s) => Ok((StressField::Constant(*s), None)),
        StressMode::FeDerived { load, clamped, degree } => {
            let space = FeSpace::vector(mesh.clone(), *degree)?;
            let f = |p: [f64; 2]| load.eval(p);
            let u = solve_membrane(&space, mat, &f, clamped, None)?;
            let stress = stress_from_displacement(&u, &space, mat)?;
            Ok((
                stress.scaled(-1.0),
                Some(MembraneState {
                    space,
                    displacement: u,
                    stress,
                }),
            ))
        }
    }
}

/// Eigenpairs of the plate pencil on `space`.
pub fn plate_eigenpairs(
    cfg: &RunConfig,
    space: &FeSpace,
    sigma: &StressField,
    mat: &Material,
) -> Result<(Vec<EigenPair>, Vec<Vec<f64>>)> {
    let part = plate_constraints(space)?;
    let k = part.restrict(&assemble_plate(space, mat, &cfg.plate_options())?);
    let g = part.restrict(&assemble_geometric(space, sigma, mat.t)?);
    let count = cfg.solve_count().min(part.n_free());
    let pairs = smallest_eigenpairs(&k, &g, count, &cfg.eigen_options())?;
    let modes = pairs.iter().map(|p| part.expand(&p.vector)).collect();
    Ok((pairs, modes))
}

/// Indicators for the eigenpair `tracked` of one step.
pub fn estimate_step(
    cfg: &RunConfig,
    space: &FeSpace,
    sigma: &StressField,
    membrane: Option<&MembraneState>,
    pair: &EigenPair,
    mode: &[f64],
    tracked: usize,
    mat: &Material,
) -> Result<IndicatorSet> {
    let mesh = space.mesh();
    let opts = cfg.plate_options();
    let est = &cfg.estimator;
    let alphas = est.alphas_for(space.degree())?;
    let plate = plate_element_residual(space, mode, pair.lambda_hat, sigma, mat, &opts, est.jump_weight);
    let r_m2 = match (&cfg.stress, membrane) {
        (StressMode::FeDerived { load, clamped, .. }, Some(m)) => {
            let f = |p: [f64; 2]| load.eval(p);
            membrane_element_residual(&m.space, &m.stress, &f, clamped, est.membrane_edge).r2
        }
        _ => vec![0.0; mesh.n_triangles()],
    };
    match est.mode {
        EstimatorMode::Residual => {
            let h: Vec<f64> = (0..mesh.n_triangles()).map(|t| mesh.diameter(t)).collect();
            residual_estimate(&h, &plate.r2, &r_m2, alphas, est)
        }
        EstimatorMode::Dwr => {
            let input = PlateDualInput {
                space,
                u: mode,
                lambda_hat: pair.lambda_hat,
                mode: tracked,
                sigma,
                mat,
                opts: &opts,
            };
            let pd = solve_plate_dual(est.target, &input, est.enrichment, &cfg.eigen_options())?;
            let w_p = dwr_weights(&pd, mesh, alphas.plate);
            let w_m = match (&cfg.stress, membrane) {
                (StressMode::FeDerived { clamped, degree, .. }, Some(_)) => {
                    let md = solve_membrane_dual(&pd, *degree, clamped, pair.lambda_hat, mat)?;
                    dwr_weights(&md, mesh, alphas.membrane)
                }
                _ => vec![0.0; mesh.n_triangles()],
            };
            let r_p: Vec<f64> = plate.r2.iter().map(|v| v.sqrt()).collect();
            let r_m: Vec<f64> = r_m2.iter().map(|v| v.sqrt()).collect();
            dwr_estimate(&r_p, &r_m, &w_p, &w_m, alphas, est)
        }
    }
}

/// Index of the mode in `modes` with the largest `|z^T G prev|`.
fn track(space: &FeSpace, sigma: &StressField, t: f64, modes: &[Vec<f64>], prev: &[f64]) -> Result<usize> {
    let g = assemble_geometric(space, sigma, t)?;
    let gp = g.mul(prev);
    let overlap = |z: &Vec<f64>| z.iter().zip(&gp).map(|(a, b)| a * b).sum::<f64>().abs();
    Ok((0..modes.len())
        .max_by(|&a, &b| overlap(&modes[a]).total_cmp(&overlap(&modes[b])).then(b.cmp(&a)))
        .expect("at least one mode"))
}

fn solve_step(
    cfg: &RunConfig,
    step: usize,
    mesh: Arc<Mesh>,
    mat: &Material,
    previous: Option<(&StepState, &[usize])>,
) -> Result<StepState> {
    let (sigma, membrane) = membrane_stress(cfg, &mesh, mat)?;
    let space = FeSpace::scalar(mesh.clone(), cfg.plate_degree)?;
    let (pairs, modes) = plate_eigenpairs(cfg, &space, &sigma, mat)?;
    let tracked = match previous {
        None => (cfg.target_mode - 1).min(pairs.len() - 1),
        Some((prev, parent)) => {
            let carried = space.transfer_from(&prev.space, &prev.modes[prev.tracked], parent);
            track(&space, &sigma, mat.t, &modes, &carried)?
        }
    };
    let indicators = estimate_step(
        cfg,
        &space,
        &sigma,
        membrane.as_ref(),
        &pairs[tracked],
        &modes[tracked],
        tracked,
        mat,
    )?;
    Ok(StepState {
        step,
        mesh,
        space,
        sigma,
        membrane,
        pairs,
        modes,
        tracked,
        indicators,
    })
}

fn record(cfg: &RunConfig, state: &StepState, seconds: Option<f64>) -> AdaptRecord {
    let lambdas: Vec<f64> = state.pairs.iter().map(|p| p.lambda_hat).collect();
    let ind = &state.indicators;
    let effectivity = cfg
        .reference
        .and_then(|r| effectivity_index(ind.estimate, lambdas[state.tracked], r, true).ok());
    AdaptRecord {
        step: state.step,
        n_dofs: state.space.n_dofs(),
        n_elements: state.mesh.n_triangles(),
        lambdas,
        tracked: state.tracked,
        estimate: ind.estimate,
        plate_estimate: ind.plate_estimate,
        membrane_estimate: ind.membrane_estimate,
        effectivity,
        seconds,
    }
}

/// Runs the adaptive loop; `observe` sees every step after it is estimated.
pub fn adaptive_loop_with(
    cfg: &RunConfig,
    mut observe: impl FnMut(&StepState, &AdaptRecord) -> Result<()>,
) -> Result<AdaptRun> {
    cfg.validate()?;
    let mat = cfg.material()?;
    let mut mesh = Arc::new(cfg.geometry.build(cfg.n)?);
    let mut records = Vec::new();
    let mut prev: Option<(StepState, Vec<usize>)> = None;
    let mut step = 0;
    loop {
        let clock = Instant::now();
        let state = solve_step(cfg, step, mesh.clone(), &mat, prev.as_ref().map(|(s, p)| (s, p.as_slice())))
            .map_err(|e| Error::Step {
                step,
                source: Box::new(e),
            })?;
        let seconds = cfg.timing.then(|| clock.elapsed().as_secs_f64());
        let rec = record(cfg, &state, seconds);
        info!(
            "step {step}: {} dofs, lambda = {:.10}, estimate = {:.4e}",
            rec.n_dofs,
            rec.target_lambda(),
            rec.estimate
        );
        observe(&state, &rec)?;
        records.push(rec);
        if step >= cfg.max_steps || state.space.n_dofs() >= cfg.max_dofs {
            return Ok(AdaptRun { records, last: state });
        }
        let marked = mark_fixed_ratio(&state.indicators.eta, cfg.fraction)?;
        let refined = bisect(&mesh, &marked)?;
        mesh = Arc::new(refined.mesh);
        prev = Some((state, refined.parent));
        step += 1;
    }
}

pub fn adaptive_loop(cfg: &RunConfig) -> Result<AdaptRun> {
    adaptive_loop_with(cfg, |_, _| Ok(()))
}

/// Share of triangles whose centroid lies within `radius` of `center`.
pub fn fraction_near(mesh: &Mesh, center: [f64; 2], radius: f64) -> f64 {
    let near = (0..mesh.n_triangles())
        .filter(|&t| {
            let c = mesh.centroid(t);
            (c[0] - center[0]).hypot(c[1] - center[1]) < radius
        })
        .count();
    near as f64 / mesh.n_triangles() as f64
}
