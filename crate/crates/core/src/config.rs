//! Run configuration shared by the adaptive loop and the file format.

use std::path::PathBuf;

use crate::eigen::EigenOptions;
use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;
use crate::fem::{LameConvention, Material, PenaltyModulus, PlateBc, PlateOptions, Sym2};
use crate::mesh::{build_lshape, build_unit_square, Mesh, LSHAPE_TAGS, SQUARE_TAGS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    LShape,
    Square,
}

impl Geometry {
    pub fn name(self) -> &'static str {
        match self {
            Geometry::LShape => "lshape",
            Geometry::Square => "square",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "lshape" => Some(Geometry::LShape),
            "square" => Some(Geometry::Square),
            _ => None,
        }
    }

    pub fn tags(self) -> &'static [&'static str] {
        match self {
            Geometry::LShape => &LSHAPE_TAGS,
            Geometry::Square => &SQUARE_TAGS,
        }
    }

    pub fn build(self, n: usize) -> Result<Mesh> {
        match self {
            Geometry::LShape => build_lshape(n),
            Geometry::Square => build_unit_square(n),
        }
    }
}

/// In-plane body force of the membrane problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MembraneLoad {
    Zero,
    Constant([f64; 2]),
    /// `f = scale * |x - corner|`.
    CornerDistance { corner: [f64; 2], scale: [f64; 2] },
}

impl MembraneLoad {
    pub fn eval(&self, p: [f64; 2]) -> [f64; 2] {
        match *self {
            MembraneLoad::Zero => [0.0, 0.0],
            MembraneLoad::Constant(f) => f,
            MembraneLoad::CornerDistance { corner, scale } => {
                let r = (p[0] - corner[0]).hypot(p[1] - corner[1]);
                [scale[0] * r, scale[1] * r]
            }
        }
    }
}

/// Source of the membrane stress in the geometric stiffness.
#[derive(Debug, Clone, PartialEq)]
pub enum StressMode {
    Prescribed(Sym2),
    FeDerived {
        load: MembraneLoad,
        /// Tags with zero displacement; all others are traction free.
        clamped: Vec<String>,
        degree: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: Geometry,
    /// Initial mesh parameter.
    pub n: usize,
    pub e: f64,
    pub nu: f64,
    pub t: f64,
    pub lame: LameConvention,
    pub plate_bc: PlateBc,
    pub plate_degree: usize,
    pub gamma: f64,
    pub penalty: PenaltyModulus,
    pub stress: StressMode,
    /// Number of eigenpairs computed per step.
    pub eigen_count: usize,
    /// One-based index of the eigenpair driving the estimator.
    pub target_mode: usize,
    pub eigen_tol: f64,
    pub estimator: EstimatorConfig,
    pub fraction: f64,
    pub max_steps: usize,
    pub max_dofs: usize,
    pub output: PathBuf,
    /// Reference value of the target eigenvalue.
    pub reference: Option<f64>,
    /// Record wall time per step; off keeps histories reproducible.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry::LShape,
            n: 4,
            e: 1.0,
            nu: 0.25,
            t: 1.0,
            lame: LameConvention::PlaneStress,
            plate_bc: PlateBc::SimplySupported,
            plate_degree: 2,
            gamma: 10.0,
            penalty: PenaltyModulus::Plate,
            stress: StressMode::Prescribed(Sym2::IDENTITY),
            eigen_count: 3,
            target_mode: 1,
            eigen_tol: 1e-9,
            estimator: EstimatorConfig::default(),
            fraction: 0.25,
            max_steps: 12,
            max_dofs: 200_000,
            output: PathBuf::from("out"),
            reference: None,
            timing: false,
        }
    }
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::ConfigValue {
        field: field.into(),
        message: message.into(),
    }
}

impl RunConfig {
    pub fn material(&self) -> Result<Material> {
        Material::with_convention(self.e, self.nu, self.t, self.lame)
    }

    pub fn plate_options(&self) -> PlateOptions {
        PlateOptions {
            gamma: self.gamma,
            bc: self.plate_bc,
            modulus: self.penalty,
        }
    }

    pub fn eigen_options(&self) -> EigenOptions {
        EigenOptions {
            tol: self.eigen_tol,
            ..EigenOptions::default()
        }
    }

    /// Eigenpairs computed per step: at least up to the target.
    pub fn solve_count(&self) -> usize {
        self.eigen_count.max(self.target_mode)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("geometry.n", "must be at least 1"));
        }
        self.material().map_err(|e| invalid("material", e.to_string()))?;
        if !(2..=5).contains(&self.plate_degree) {
            return Err(invalid("plate.degree", format!("must lie in 2..=5, got {}", self.plate_degree)));
        }
        self.plate_options().check().map_err(|e| invalid("plate", e.to_string()))?;
        if let StressMode::FeDerived { clamped, degree, .. } = &self.stress {
            if clamped.is_empty() {
                return Err(invalid("membrane.clamped", "at least one clamped tag is required"));
            }
            let tags = self.geometry.tags();
            if let Some(bad) = clamped.iter().find(|c| !tags.contains(&c.as_str())) {
                return Err(invalid(
                    "membrane.clamped",
                    format!("unknown tag `{bad}` for {} (valid: {})", self.geometry.name(), tags.join(", ")),
                ));
            }
            if !(1..=5).contains(degree) {
                return Err(invalid("membrane.degree", format!("must lie in 1..=5, got {degree}")));
            }
        }
        if self.eigen_count == 0 {
            return Err(invalid("eigen.count", "must be at least 1"));
        }
        if self.target_mode == 0 {
            return Err(invalid("estimator.mode_index", "is one-based"));
        }
        if !(self.eigen_tol > 0.0 && self.eigen_tol < 1.0) {
            return Err(invalid("eigen.tol", format!("must lie in (0, 1), got {}", self.eigen_tol)));
        }
        self.estimator.check().map_err(|e| invalid("estimator", e.to_string()))?;
        self.estimator
            .alphas_for(self.plate_degree)
            .map_err(|e| invalid("estimator.alpha", e.to_string()))?;
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(invalid("adapt.fraction", format!("must lie in (0, 1], got {}", self.fraction)));
        }
        if self.max_dofs == 0 {
            return Err(invalid("adapt.max_dofs", "must be positive"));
        }
        if let Some(r) = self.reference {
            if !r.is_finite() {
                return Err(invalid("reference.lambda", "must be finite"));
            }
        }
        Ok(())
    }
}
