//! Sparse factorization and the generalized eigenvalue solver.

mod factor;
pub mod minres;
pub mod oracle;
mod pencil;

pub use factor::{factor_spd, Factorization};
pub use pencil::{fix_sign, normalize_energy, smallest_eigenpairs, solve_with_factor, EigenOptions, EigenPair};
