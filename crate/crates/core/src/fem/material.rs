//! Isotropic material data and the two constitutive laws: the plane-stress
//! membrane law and the Kirchhoff plate bending law.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Symmetric 2x2 tensor stored by its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };
    pub const IDENTITY: Sym2 = Sym2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Double contraction `A : B`.
    pub fn ddot(&self, other: &Sym2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
    }

    /// Symmetric part of a full 2x2 matrix `[[a00, a01], [a10, a11]]`.
    pub fn sym_part(m: [[f64; 2]; 2]) -> Self {
        Self::new(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1])
    }

    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

impl Mul<Sym2> for f64 {
    type Output = Sym2;
    fn mul(self, s: Sym2) -> Sym2 {
        Sym2::new(self * s.xx, self * s.xy, self * s.yy)
    }
}

/// Which relations turn `(E, nu)` into Lamé parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LameConvention {
    /// `mu = E / (2(1 + nu))`, `lambda = E nu / (1 - nu^2)`.
    #[default]
    PlaneStress,
    /// `lambda = E / (1 + nu)`, `mu = E nu / (1 - nu^2)`, kept for
    /// comparison runs against that variant.
    Swapped,
}

fn check_e_nu(e: f64, nu: f64) -> Result<()> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::param("E", format!("Young's modulus must be positive, got {e}")));
    }
    if !(0.0..0.5).contains(&nu) {
        return Err(Error::param("nu", format!("Poisson ratio must lie in [0, 1/2), got {nu}")));
    }
    Ok(())
}

/// Plane-stress Lamé parameters `(mu, lambda)`.
pub fn lame_plane_stress(e: f64, nu: f64) -> Result<(f64, f64)> {
    lame_parameters(e, nu, LameConvention::PlaneStress)
}

pub fn lame_parameters(e: f64, nu: f64, convention: LameConvention) -> Result<(f64, f64)> {
    check_e_nu(e, nu)?;
    Ok(match convention {
        LameConvention::PlaneStress => (e / (2.0 * (1.0 + nu)), e * nu / (1.0 - nu * nu)),
        LameConvention::Swapped => (e * nu / (1.0 - nu * nu), e / (1.0 + nu)),
    })
}

/// Material constants shared by the membrane and plate problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// Young's modulus.
    pub e: f64,
    /// Poisson ratio.
    pub nu: f64,
    /// Plate thickness.
    pub t: f64,
    /// Membrane Lamé parameters.
    pub mu: f64,
    pub lambda: f64,
    /// Bending stiffness `E t^3 / (12 (1 - nu^2))`.
    pub d: f64,
}

impl Material {
    pub fn new(e: f64, nu: f64, t: f64) -> Result<Self> {
        Self::with_convention(e, nu, t, LameConvention::PlaneStress)
    }

    pub fn with_convention(e: f64, nu: f64, t: f64, convention: LameConvention) -> Result<Self> {
        let (mu, lambda) = lame_parameters(e, nu, convention)?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::param("t", format!("thickness must be positive, got {t}")));
        }
        Ok(Self {
            e,
            nu,
            t,
            mu,
            lambda,
            d: e * t.powi(3) / (12.0 * (1.0 - nu * nu)),
        })
    }

    /// Plate moduli `(mu_P, lambda_P)` such that
    /// `sigma_P(eps) = 2 mu_P eps + lambda_P tr(eps) I`.
    pub fn plate_lame(&self) -> (f64, f64) {
        (0.5 * self.d * (1.0 - self.nu), self.d * self.nu)
    }
}

/// Plate moment tensor `D ((1 - nu) eps + nu tr(eps) I)`.
pub fn plate_stress(eps: Sym2, mat: &Material) -> Sym2 {
    let tr = eps.trace();
    let s = mat.d * (1.0 - mat.nu);
    let p = mat.d * mat.nu * tr;
    Sym2::new(s * eps.xx + p, s * eps.xy, s * eps.yy + p)
}

/// Membrane stress `2 mu eps + lambda tr(eps) I`.
pub fn membrane_stress(eps: Sym2, mat: &Material) -> Sym2 {
    membrane_stress_lame(eps, mat.mu, mat.lambda)
}

pub(crate) fn membrane_stress_lame(eps: Sym2, mu: f64, lambda: f64) -> Sym2 {
    let p = lambda * eps.trace();
    Sym2::new(2.0 * mu * eps.xx + p, 2.0 * mu * eps.xy, 2.0 * mu * eps.yy + p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_material() -> Material {
        Material::new(1.0, 0.25, 1.0).unwrap()
    }

    #[test]
    fn lame_reference_values() {
        let (mu, lambda) = lame_plane_stress(1.0, 0.25).unwrap();
        assert_relative_eq!(mu, 0.4, epsilon = 1e-15);
        assert_relative_eq!(lambda, 4.0 / 15.0, epsilon = 1e-15);
        let (_, l0) = lame_plane_stress(1.0, 0.0).unwrap();
        assert_eq!(l0, 0.0);
        let (mu2, lambda2) = lame_plane_stress(2.0, 0.25).unwrap();
        assert_relative_eq!(mu2, 2.0 * mu, epsilon = 1e-15);
        assert_relative_eq!(lambda2, 2.0 * lambda, epsilon = 1e-15);
    }

    #[test]
    fn swapped_convention_exchanges_roles() {
        let (mu, lambda) = lame_parameters(1.0, 0.25, LameConvention::Swapped).unwrap();
        assert_relative_eq!(lambda, 0.8, epsilon = 1e-15);
        assert_relative_eq!(mu, 0.25 / (1.0 - 0.0625), epsilon = 1e-15);
    }

    #[test]
    fn lame_domain_errors() {
        assert!(lame_plane_stress(0.0, 0.25).is_err());
        assert!(lame_plane_stress(1.0, 0.5).is_err());
        assert!(lame_plane_stress(1.0, -0.1).is_err());
        assert!(Material::new(1.0, 0.25, 0.0).is_err());
    }

    #[test]
    fn bending_stiffness() {
        let m = reference_material();
        assert_relative_eq!(m.d, 4.0 / 45.0, epsilon = 1e-15);
        let m2 = Material::new(3.0, 0.3, 0.1).unwrap();
        assert_eq!(m2.d, 3.0 * 0.1f64.powi(3) / (12.0 * (1.0 - 0.09)));
    }

    #[test]
    fn plate_stress_examples() {
        let m = reference_material();
        let s = plate_stress(Sym2::IDENTITY, &m);
        assert_relative_eq!(s.xx, 1.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(s.yy, 1.0 / 9.0, epsilon = 1e-15);
        assert_eq!(s.xy, 0.0);
        assert_eq!(plate_stress(Sym2::ZERO, &m), Sym2::ZERO);
        let shear = Sym2::new(0.3, -0.7, -0.3);
        let s = plate_stress(shear, &m);
        let expect = (m.d * 0.75) * shear;
        assert_relative_eq!(s.xx, expect.xx, epsilon = 1e-15);
        assert_relative_eq!(s.xy, expect.xy, epsilon = 1e-15);
        assert_relative_eq!(s.yy, expect.yy, epsilon = 1e-15);
    }

    #[test]
    fn membrane_stress_examples() {
        let m = reference_material();
        let s = membrane_stress(Sym2::IDENTITY, &m);
        assert_relative_eq!(s.xx, 0.8 + 8.0 / 15.0, epsilon = 1e-15);
        assert_relative_eq!(s.xx, 4.0 / 3.0, epsilon = 1e-15);
        assert_eq!(membrane_stress(Sym2::ZERO, &m), Sym2::ZERO);
        let (a, b) = (0.3, -1.1);
        let s = membrane_stress(Sym2::new(a, 0.0, b), &m);
        assert_relative_eq!(s.xx, 2.0 * m.mu * a + m.lambda * (a + b), epsilon = 1e-15);
        assert_relative_eq!(s.yy, 2.0 * m.mu * b + m.lambda * (a + b), epsilon = 1e-15);
        assert_eq!(s.xy, 0.0);
    }

    #[test]
    fn plate_lame_reproduces_plate_law() {
        let m = reference_material();
        let (mu_p, lambda_p) = m.plate_lame();
        let eps = Sym2::new(0.2, 0.5, -1.3);
        let a = plate_stress(eps, &m);
        let b = membrane_stress_lame(eps, mu_p, lambda_p);
        assert_relative_eq!(a.xx, b.xx, epsilon = 1e-15);
        assert_relative_eq!(a.xy, b.xy, epsilon = 1e-15);
        assert_relative_eq!(a.yy, b.yy, epsilon = 1e-15);
    }
}
