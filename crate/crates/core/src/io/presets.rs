//! Named configurations for the two L-shape experiments.

use std::f64::consts::PI;
use std::path::PathBuf;

use crate::config::{Geometry, MembraneLoad, RunConfig, StressMode};
use crate::error::{Error, Result};
use crate::estimator::{Alphas, EstimatorConfig};
use crate::fem::{PlateBc, Sym2};

/// Third buckling load of the simply supported L-shape under unit stress,
/// from separation of variables on the unit square: `32 pi^2 / 45`.
pub const LSHAPE_THIRD: f64 = 32.0 * PI * PI / 45.0;

/// First buckling load of the same problem. Its mode is the Dirichlet
/// Laplace eigenfunction of the L-shape antisymmetric about the diagonal,
/// so the load is `D mu` with `mu = 4 * 15.19725192941` rescaled from the
/// side-2 domain; a 1/N extrapolation of adaptive runs agrees to 5e-5.
pub const LSHAPE_FIRST: f64 = 4.0 * 15.197_251_929_41 / 11.25;

/// Second buckling load, extrapolated from adaptive runs up to 4.9e5 DOFs.
/// Accurate to about 1e-4 relative.
pub const LSHAPE_SECOND: f64 = 5.5576;

/// Estimator constant shared by the unit-stress runs.
pub const UNIT_STRESS_C: f64 = 0.08;

/// Plate exponent of the unit-stress presets. The dual of the first two
/// loads behaves like `r^(4/3)` at the reentrant corner, one order below
/// the `k + 1 = 3` a smooth dual would give.
pub const UNIT_STRESS_ALPHA: f64 = 7.0 / 3.0;

/// First buckling load of the coupled problem, extrapolated in `N^-p` from
/// adaptive runs up to 4.4e5 DOFs; fits over different windows agree to 3e-3.
pub const COUPLED_FIRST: f64 = 52.495;

/// Estimator constant of the coupled preset.
pub const COUPLED_C: f64 = 0.08;

/// Membrane weight of the coupled preset. The membrane residual is tiny next
/// to the plate residual, which carries a factor of the load itself; this
/// weight makes the combined effectivity flatter than either part.
pub const COUPLED_BALANCE: f64 = 2e5;

/// Reentrant corner of the L-shape.
pub const CORNER: [f64; 2] = [0.5, 0.5];

pub const PRESET_NAMES: [&str; 4] = [
    "lshape_unit_stress",
    "lshape_unit_stress_2",
    "lshape_unit_stress_3",
    "lshape_coupled",
];

fn unit_stress(mode: usize, name: &str) -> RunConfig {
    RunConfig {
        geometry: Geometry::LShape,
        n: 6,
        e: 1.0,
        nu: 0.25,
        t: 1.0,
        plate_bc: PlateBc::SimplySupported,
        stress: StressMode::Prescribed(Sym2::IDENTITY),
        eigen_count: 3,
        target_mode: mode,
        estimator: EstimatorConfig {
            alphas: Some(Alphas {
                plate: UNIT_STRESS_ALPHA,
                membrane: 2.0,
            }),
            c: UNIT_STRESS_C,
            ..EstimatorConfig::default()
        },
        fraction: 0.25,
        reference: (mode == 3).then_some(LSHAPE_THIRD),
        output: PathBuf::from("out").join(name),
        ..RunConfig::default()
    }
}

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<RunConfig> {
    let cfg = match name {
        "lshape_unit_stress" => unit_stress(1, name),
        "lshape_unit_stress_2" => unit_stress(2, name),
        "lshape_unit_stress_3" => unit_stress(3, name),
        "lshape_coupled" => {
            let mut c = unit_stress(1, name);
            c.stress = StressMode::FeDerived {
                load: MembraneLoad::CornerDistance {
                    corner: CORNER,
                    scale: [1.0, -0.9],
                },
                clamped: ["reentrant_x", "bottom", "right", "reentrant_y"]
                    .map(String::from)
                    .to_vec(),
                degree: c.plate_degree,
            };
            c.estimator.c = COUPLED_C;
            c.estimator.balance = COUPLED_BALANCE;
            c
        }
        _ => {
            return Err(Error::ConfigValue {
                field: "preset".into(),
                message: format!("unknown preset `{name}` (valid: {})", PRESET_NAMES.join(", ")),
            })
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{parse_config, serialize_config};

    #[test]
    fn presets_round_trip() {
        for name in PRESET_NAMES {
            let c = preset(name).unwrap();
            assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn unit_stress_matches_setup() {
        let c = preset("lshape_unit_stress").unwrap();
        assert_eq!((c.e, c.nu, c.t, c.fraction), (1.0, 0.25, 1.0, 0.25));
        assert_eq!(c.stress, StressMode::Prescribed(Sym2::IDENTITY));
        assert_eq!(c.plate_bc, PlateBc::SimplySupported);
        assert_eq!(c.reference, None);
        assert_eq!(preset("lshape_unit_stress_3").unwrap().reference, Some(LSHAPE_THIRD));
    }

    #[test]
    fn coupled_load_and_tags() {
        let c = preset("lshape_coupled").unwrap();
        let StressMode::FeDerived { load, clamped, .. } = c.stress else { panic!() };
        let f = load.eval([0.5, 0.0]);
        assert_eq!(f, [0.5, -0.45]);
        assert_eq!(clamped, ["reentrant_x", "bottom", "right", "reentrant_y"]);
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = preset("square").unwrap_err().to_string();
        assert!(PRESET_NAMES.iter().all(|n| err.contains(n)), "{err}");
    }
}
