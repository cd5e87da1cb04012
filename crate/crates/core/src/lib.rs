//! Adaptive continuous/discontinuous Galerkin buckling analysis of
//! Kirchhoff-Love plates.
//!
//! The pipeline solves a plane-stress membrane problem (or takes a prescribed
//! stress), assembles the c/dG plate operator and the geometric stiffness,
//! extracts the lowest buckling loads, estimates their error and refines the
//! mesh where the estimate is largest.

// `!(x > 0.0)` rejects NaN on purpose; element loops index several arrays at once
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod adapt;
pub mod config;
pub mod error;
pub mod fem;
pub mod io;
pub mod eigen;
pub mod estimator;
pub mod mesh;
pub mod par;
pub mod verify;

pub use error::{Error, Result};
