//! A posteriori error estimation: element residuals, residual-based and
//! dual-weighted estimates, effectivity indices.

pub mod dual;
pub mod residual;

pub use dual::{dwr_weights, solve_membrane_dual, solve_plate_dual, DualKind, DualSolution, Enrichment, PlateDualInput};
pub use residual::{
    membrane_element_residual, plate_element_residual, JumpWeight, MembraneEdgeTerm, MembraneResidual, PlateEdgeJumps,
    PlateResidual,
};

use crate::error::{Error, Result};

/// Quantity whose error is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Target {
    #[default]
    Eigenvalue,
    /// `|e|_0`.
    EigenvectorL2,
    /// `|e|_1`.
    EigenvectorH1,
}

impl Target {
    /// Seminorm order `m` of eigenvector targets.
    pub fn order(self) -> Option<u32> {
        match self {
            Target::Eigenvalue => None,
            Target::EigenvectorL2 => Some(0),
            Target::EigenvectorH1 => Some(1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::Eigenvalue => "eigenvalue",
            Target::EigenvectorL2 => "eigenvector_m0",
            Target::EigenvectorH1 => "eigenvector_m1",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Target::Eigenvalue, Target::EigenvectorL2, Target::EigenvectorH1]
            .into_iter()
            .find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorMode {
    #[default]
    Residual,
    Dwr,
}

impl EstimatorMode {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorMode::Residual => "residual",
            EstimatorMode::Dwr => "dwr",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "residual" => Some(EstimatorMode::Residual),
            "dwr" => Some(EstimatorMode::Dwr),
            _ => None,
        }
    }
}

/// Mesh-size exponents of the plate and membrane parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alphas {
    pub plate: f64,
    pub membrane: f64,
}

impl Alphas {
    /// `k + 1` for eigenvalues, `4 - m` for eigenvector seminorms, 2 for the
    /// membrane.
    pub fn default_for(target: Target, k: usize) -> Self {
        let plate = match target.order() {
            None => k as f64 + 1.0,
            Some(m) => 4.0 - m as f64,
        };
        Alphas { plate, membrane: 2.0 }
    }

    /// Accepts exponents in `[0, max(k + 1, default)]`.
    pub fn check(&self, target: Target, k: usize) -> Result<()> {
        let d = Alphas::default_for(target, k);
        let top_p = (k as f64 + 1.0).max(d.plate);
        let top_m = (k as f64 + 1.0).max(d.membrane);
        if !(0.0..=top_p).contains(&self.plate) {
            return Err(Error::param("alpha_plate", format!("{} outside [0, {top_p}]", self.plate)));
        }
        if !(0.0..=top_m).contains(&self.membrane) {
            return Err(Error::param("alpha_membrane", format!("{} outside [0, {top_m}]", self.membrane)));
        }
        Ok(())
    }
}

/// Estimator settings shared by both modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub mode: EstimatorMode,
    pub target: Target,
    /// `None` selects [`Alphas::default_for`].
    pub alphas: Option<Alphas>,
    pub c: f64,
    pub delta: f64,
    /// Weight of the membrane part.
    pub balance: f64,
    pub membrane_edge: MembraneEdgeTerm,
    pub jump_weight: JumpWeight,
    pub enrichment: Enrichment,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            mode: EstimatorMode::Residual,
            target: Target::Eigenvalue,
            alphas: None,
            c: 1.0,
            delta: 0.0,
            balance: 1.0,
            membrane_edge: MembraneEdgeTerm::TractionJump,
            jump_weight: JumpWeight::Penalty,
            enrichment: Enrichment::DegreeElevation,
        }
    }
}

impl EstimatorConfig {
    pub fn alphas_for(&self, k: usize) -> Result<Alphas> {
        let a = self.alphas.unwrap_or_else(|| Alphas::default_for(self.target, k));
        a.check(self.target, k)?;
        Ok(a)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::param("C", format!("must be positive, got {}", self.c)));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::param("delta", format!("must lie in [0, 1), got {}", self.delta)));
        }
        if !(self.balance >= 0.0) || !self.balance.is_finite() {
            return Err(Error::param("balance", format!("must be non-negative, got {}", self.balance)));
        }
        Ok(())
    }
}

/// Per-element indicators and the global estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSet {
    pub mode: EstimatorMode,
    pub target: Target,
    pub r_p: Vec<f64>,
    pub r_m: Vec<f64>,
    /// `h_T^alpha` in residual mode, dual weights in DWR mode.
    pub w_p: Vec<f64>,
    pub w_m: Vec<f64>,
    /// Residual mode: `C^2 (w_p^2 r_p^2 + balance w_m^2 r_m^2)`, summing to
    /// `estimate^2`. DWR mode: `C (r_p w_p + balance r_m w_m)`, summing to
    /// `estimate`.
    pub eta: Vec<f64>,
    pub estimate: f64,
    /// Estimate with the membrane part removed.
    pub plate_estimate: f64,
    /// Estimate with the plate part removed.
    pub membrane_estimate: f64,
    pub c: f64,
    pub delta: f64,
    pub alphas: Alphas,
    pub balance: f64,
}

impl IndicatorSet {
    pub fn n_elements(&self) -> usize {
        self.eta.len()
    }

    /// Estimate divided by `sqrt(1 - delta^2)` for eigenvalues and by
    /// `1 - delta` for eigenvectors.
    pub fn error_bound(&self) -> f64 {
        match self.target {
            Target::Eigenvalue => self.estimate / (1.0 - self.delta * self.delta).sqrt(),
            _ => self.estimate / (1.0 - self.delta),
        }
    }
}

fn check_lengths(name: &str, expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::LengthMismatch {
            name: name.into(),
            expected,
            actual: v.len(),
        });
    }
    Ok(())
}

/// Residual-based estimate from squared residuals `r_p2`, `r_m2` and
/// element diameters `h`.
pub fn residual_estimate(
    h: &[f64],
    r_p2: &[f64],
    r_m2: &[f64],
    alphas: Alphas,
    cfg: &EstimatorConfig,
) -> Result<IndicatorSet> {
    cfg.check()?;
    let n = h.len();
    check_lengths("r_p", n, r_p2)?;
    check_lengths("r_m", n, r_m2)?;
    let w_p: Vec<f64> = h.iter().map(|h| h.powf(alphas.plate)).collect();
    let w_m: Vec<f64> = h.iter().map(|h| h.powf(alphas.membrane)).collect();
    let c2 = cfg.c * cfg.c;
    let plate: Vec<f64> = (0..n).map(|t| c2 * w_p[t] * w_p[t] * r_p2[t]).collect();
    let membrane: Vec<f64> = (0..n).map(|t| c2 * cfg.balance * w_m[t] * w_m[t] * r_m2[t]).collect();
    let eta: Vec<f64> = plate.iter().zip(&membrane).map(|(a, b)| a + b).collect();
    Ok(IndicatorSet {
        mode: EstimatorMode::Residual,
        target: cfg.target,
        r_p: r_p2.iter().map(|r| r.max(0.0).sqrt()).collect(),
        r_m: r_m2.iter().map(|r| r.max(0.0).sqrt()).collect(),
        w_p,
        w_m,
        estimate: eta.iter().sum::<f64>().sqrt(),
        plate_estimate: plate.iter().sum::<f64>().sqrt(),
        membrane_estimate: membrane.iter().sum::<f64>().sqrt(),
        eta,
        c: cfg.c,
        delta: cfg.delta,
        alphas,
        balance: cfg.balance,
    })
}

/// Dual-weighted estimate `C sum_T (R_P W_P + balance R_M W_M)`.
pub fn dwr_estimate(
    r_p: &[f64],
    r_m: &[f64],
    w_p: &[f64],
    w_m: &[f64],
    alphas: Alphas,
    cfg: &EstimatorConfig,
) -> Result<IndicatorSet> {
    cfg.check()?;
    let n = r_p.len();
    check_lengths("r_m", n, r_m)?;
    check_lengths("w_p", n, w_p)?;
    check_lengths("w_m", n, w_m)?;
    let plate: Vec<f64> = (0..n).map(|t| cfg.c * r_p[t] * w_p[t]).collect();
    let membrane: Vec<f64> = (0..n).map(|t| cfg.c * cfg.balance * r_m[t] * w_m[t]).collect();
    let eta: Vec<f64> = plate.iter().zip(&membrane).map(|(a, b)| a + b).collect();
    Ok(IndicatorSet {
        mode: EstimatorMode::Dwr,
        target: cfg.target,
        r_p: r_p.to_vec(),
        r_m: r_m.to_vec(),
        w_p: w_p.to_vec(),
        w_m: w_m.to_vec(),
        estimate: eta.iter().sum(),
        plate_estimate: plate.iter().sum(),
        membrane_estimate: membrane.iter().sum(),
        eta,
        c: cfg.c,
        delta: cfg.delta,
        alphas,
        balance: cfg.balance,
    })
}

/// `estimate / |lambda_h - lambda_ref|`; with `relative` the true error is
/// divided by `|lambda_ref|`.
pub fn effectivity_index(estimate: f64, lambda_h: f64, lambda_ref: f64, relative: bool) -> Result<f64> {
    let mut err = (lambda_h - lambda_ref).abs();
    if relative {
        err /= lambda_ref.abs();
    }
    if !(err > 0.0) {
        return Err(Error::UndefinedEffectivity);
    }
    Ok(estimate / err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> EstimatorConfig {
        EstimatorConfig::default()
    }

    #[test]
    fn zero_residuals_give_zero_estimate() {
        let s = residual_estimate(&[0.5; 4], &[0.0; 4], &[0.0; 4], Alphas::default_for(Target::Eigenvalue, 2), &cfg()).unwrap();
        assert_eq!(s.estimate, 0.0);
        assert!(s.eta.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn uniform_closed_form() {
        let (n, h, r, alpha, c) = (16usize, 0.25f64, 0.7f64, 3.0, 2.5);
        let cfg = EstimatorConfig { c, ..cfg() };
        let a = Alphas { plate: alpha, membrane: 2.0 };
        let s = residual_estimate(&vec![h; n], &vec![r * r; n], &vec![0.0; n], a, &cfg).unwrap();
        let want = c * (n as f64).sqrt() * h.powf(alpha) * r;
        assert!((s.estimate - want).abs() < 1e-14 * want);
        assert!((s.eta.iter().sum::<f64>() - s.estimate * s.estimate).abs() < 1e-15);
    }

    #[test]
    fn halving_h_scales_plate_part() {
        let a = Alphas::default_for(Target::Eigenvalue, 2);
        let r = [1.0, 2.0, 3.0];
        let s1 = residual_estimate(&[0.2, 0.3, 0.4], &r, &[0.0; 3], a, &cfg()).unwrap();
        let s2 = residual_estimate(&[0.1, 0.15, 0.2], &r, &[0.0; 3], a, &cfg()).unwrap();
        assert!((s2.estimate / s1.estimate - 2f64.powf(-3.0)).abs() < 1e-14);
    }

    #[test]
    fn default_alphas() {
        assert_eq!(Alphas::default_for(Target::Eigenvalue, 2), Alphas { plate: 3.0, membrane: 2.0 });
        assert_eq!(Alphas::default_for(Target::EigenvectorL2, 2).plate, 4.0);
        assert_eq!(Alphas::default_for(Target::EigenvectorH1, 2).plate, 3.0);
        assert!(Alphas { plate: -1.0, membrane: 2.0 }.check(Target::Eigenvalue, 2).is_err());
        assert!(Alphas { plate: 3.5, membrane: 2.0 }.check(Target::Eigenvalue, 2).is_err());
        assert!(Alphas { plate: 4.0, membrane: 2.0 }.check(Target::EigenvectorL2, 2).is_ok());
    }

    #[test]
    fn dwr_degenerate_cases() {
        let r = [0.5, 1.5, 2.0];
        let a = Alphas::default_for(Target::Eigenvalue, 2);
        let zero = dwr_estimate(&r, &r, &[0.0; 3], &[0.0; 3], a, &cfg()).unwrap();
        assert_eq!(zero.estimate, 0.0);
        let ones = dwr_estimate(&r, &[0.0; 3], &[1.0; 3], &[0.0; 3], a, &cfg()).unwrap();
        assert!((ones.estimate - 4.0).abs() < 1e-15);
        assert_eq!(ones.eta.iter().sum::<f64>(), ones.estimate);
    }

    #[test]
    fn dwr_cauchy_schwarz() {
        let r = [0.5, 1.5, 2.0, 0.1];
        let w = [0.3, 0.01, 1.0, 4.0];
        let a = Alphas::default_for(Target::Eigenvalue, 2);
        let s = dwr_estimate(&r, &[0.0; 4], &w, &[0.0; 4], a, &cfg()).unwrap();
        let bound = r.iter().map(|x| x * x).sum::<f64>().sqrt() * w.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(s.estimate <= bound);
    }

    #[test]
    fn effectivity() {
        assert_eq!(effectivity_index(0.5, 2.5, 2.0, false).unwrap(), 1.0);
        assert_eq!(effectivity_index(0.25, 2.5, 2.0, true).unwrap(), 1.0);
        assert!(matches!(effectivity_index(1.0, 2.0, 2.0, false), Err(Error::UndefinedEffectivity)));
        let e1 = residual_estimate(&[0.5], &[1.0], &[0.0], Alphas::default_for(Target::Eigenvalue, 2), &cfg()).unwrap();
        let e2 = residual_estimate(&[0.5], &[1.0], &[0.0], Alphas::default_for(Target::Eigenvalue, 2), &EstimatorConfig { c: 2.0, ..cfg() }).unwrap();
        let i1 = effectivity_index(e1.estimate, 1.1, 1.0, true).unwrap();
        let i2 = effectivity_index(e2.estimate, 1.1, 1.0, true).unwrap();
        assert!((i2 - 2.0 * i1).abs() < 1e-14);
    }

    #[test]
    fn bound_includes_delta() {
        let cfg = EstimatorConfig { delta: 0.6, ..cfg() };
        let s = residual_estimate(&[1.0], &[1.0], &[0.0], Alphas::default_for(Target::Eigenvalue, 2), &cfg).unwrap();
        assert!((s.error_bound() - 1.25).abs() < 1e-15);
    }
}
