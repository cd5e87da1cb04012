//! Finite element spaces, quadrature, constitutive laws and assembly.

pub mod basis;
pub mod geometric;
pub mod material;
pub mod membrane;
pub mod plate;
pub mod quadrature;
pub mod space;
pub mod sparse;
pub mod stress;

pub use geometric::{assemble_geometric, assemble_laplace, assemble_mass};
pub use material::{lame_parameters, lame_plane_stress, membrane_stress, plate_stress, LameConvention, Material, Sym2};
pub use membrane::{assemble_membrane, solve_membrane, stress_from_displacement};
pub use plate::{assemble_plate, assemble_plate_cdg, plate_constraints, PenaltyModulus, PlateBc, PlateOptions};
pub use quadrature::{triangle_rule, TriangleRule};
pub use space::FeSpace;
pub use sparse::{DofPartition, SparseOperator};
pub use stress::StressField;

use std::sync::Arc;

use crate::error::Result;
use crate::mesh::Mesh;

/// Scalar `P_k` space on `mesh`.
pub fn build_space(mesh: Arc<Mesh>, k: usize) -> Result<FeSpace> {
    FeSpace::scalar(mesh, k)
}
