//! Dimensionless parameters, regime membership and closed-form model coefficients.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The dimensionless parameter tuple.
///
/// `bond_inv` is the surface-tension strength seen by the shallow-water and
/// Green-Naghdi systems; `bo_inv` is its long-wave rescaling used by the
/// Boussinesq family (`bond_inv = mu * bo_inv`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub gamma: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub mu: f64,
    pub delta: f64,
    pub bond_inv: f64,
    pub bo_inv: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            epsilon: 0.1,
            beta: 0.0,
            mu: 0.01,
            delta: 1.0,
            bond_inv: 0.0,
            bo_inv: 0.0,
        }
    }
}

impl Params {
    /// Parameters without surface tension.
    pub fn new(gamma: f64, epsilon: f64, beta: f64, mu: f64, delta: f64) -> Self {
        Self {
            gamma,
            epsilon,
            beta,
            mu,
            delta,
            bond_inv: 0.0,
            bo_inv: 0.0,
        }
    }

    /// Set the long-wave tension `bo_inv`, deriving `bond_inv = mu * bo_inv`.
    pub fn with_bo_inv(mut self, bo_inv: f64) -> Self {
        self.bo_inv = bo_inv;
        self.bond_inv = self.mu * bo_inv;
        self
    }

    /// Set `bond_inv`, deriving `bo_inv = bond_inv / mu`.
    pub fn with_bond_inv(mut self, bond_inv: f64) -> Self {
        self.bond_inv = bond_inv;
        self.bo_inv = bond_inv / self.mu;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Change `mu`, keeping `bo_inv` fixed.
    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self.bond_inv = mu * self.bo_inv;
        self
    }

    pub fn gd(&self) -> f64 {
        self.gamma + self.delta
    }

    /// `delta^2 - gamma`, the factor carried by every quadratic nonlinearity.
    pub fn critical_factor(&self) -> f64 {
        self.delta * self.delta - self.gamma
    }

    /// Check the structural invariants (ranges, positivity).
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        let all = [
            self.gamma,
            self.epsilon,
            self.beta,
            self.mu,
            self.delta,
            self.bond_inv,
            self.bo_inv,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("params", "all values must be finite");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma", "gamma must lie in [0,1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon", "epsilon must lie in [0,1]");
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad("beta", "beta must lie in [0,1]");
        }
        if self.mu <= 0.0 {
            return bad("mu", "mu must be positive");
        }
        if self.delta <= 0.0 {
            return bad("delta", "delta must be positive");
        }
        if self.bond_inv < 0.0 {
            return bad("bond_inv", "bond_inv must be non-negative");
        }
        if self.bo_inv < 0.0 {
            return bad("bo_inv", "bo_inv must be non-negative");
        }
        Ok(())
    }

    /// Validate and additionally require `delta` inside the configured bounds.
    pub fn validate_with(&self, bounds: &RegimeBounds) -> Result<()> {
        self.validate()?;
        if self.delta < bounds.delta_min || self.delta > bounds.delta_max {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!(
                    "delta = {} outside [{}, {}]",
                    self.delta, bounds.delta_min, bounds.delta_max
                ),
            });
        }
        Ok(())
    }
}

/// Bounds defining the asymptotic regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeBounds {
    pub mu_max: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub m: f64,
    pub bo_min_inv: f64,
}

impl Default for RegimeBounds {
    fn default() -> Self {
        Self {
            mu_max: 1.0,
            delta_min: 0.1,
            delta_max: 10.0,
            m: 5.0,
            bo_min_inv: 1.0,
        }
    }
}

impl RegimeBounds {
    pub fn validate(&self) -> Result<()> {
        let vals = [self.mu_max, self.delta_min, self.delta_max, self.m, self.bo_min_inv];
        if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "regime bounds",
                reason: "all bounds must be positive and finite".into(),
            });
        }
        if self.delta_min > self.delta_max {
            return Err(Error::InvalidParameter {
                name: "regime bounds",
                reason: "delta_min exceeds delta_max".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    /// shallow water
    SW,
    /// Camassa-Holm, `epsilon = O(sqrt(mu))`
    CH,
    /// long wave, `epsilon = O(mu)`
    LW,
}

/// Regimes containing `p`.
pub fn regime_of(p: &Params, b: &RegimeBounds) -> Vec<Regime> {
    let sw = p.mu > 0.0
        && p.mu <= b.mu_max
        && (0.0..=1.0).contains(&p.epsilon)
        && p.delta >= b.delta_min
        && p.delta <= b.delta_max
        && (0.0..1.0).contains(&p.gamma);
    let mut out = Vec::new();
    if sw {
        out.push(Regime::SW);
        if p.epsilon <= b.m * p.mu.sqrt() {
            out.push(Regime::CH);
        }
        if p.epsilon <= b.m * p.mu {
            out.push(Regime::LW);
        }
    }
    out
}

fn check_gamma_delta(gamma: f64, delta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: "gamma must lie in [0,1)".into(),
        });
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: "delta must be positive".into(),
        });
    }
    Ok(())
}

/// `(1 + gamma delta) / (3 delta (gamma + delta))`
pub fn nu_gn(gamma: f64, delta: f64) -> f64 {
    (1.0 + gamma * delta) / (3.0 * delta * (gamma + delta))
}

/// Coefficients of the Camassa-Holm regime Green-Naghdi system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChgnCoeffs {
    pub nu: f64,
    pub alpha: f64,
    pub beta_c: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub varsigma: f64,
}

impl ChgnCoeffs {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        check_gamma_delta(gamma, delta)?;
        let gd = gamma + delta;
        let crit = delta * delta - gamma;
        let one_gd = 1.0 + gamma * delta;
        Ok(Self {
            nu: nu_gn(gamma, delta),
            alpha: (1.0 - gamma) / (gd * gd),
            beta_c: one_gd * crit / (delta * gd.powi(3)),
            kappa1: 2.0 * crit / gd - delta * (1.0 - gamma) / one_gd,
            kappa2: 3.0 * crit / gd,
            varsigma: 2.0 * delta * (1.0 - gamma) / (gd * one_gd) - crit / (gd * gd),
        })
    }
}

/// Family parameters of the Boussinesq systems.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoussinesqFamily {
    pub theta1: f64,
    pub theta2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Matrices of the Boussinesq system
/// `(I - mu A1 d_xx) U_t + A0 U_x + eps A[U] U_x + mu A2 U_xxx = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoussinesqOps {
    pub a0: Matrix2<f64>,
    pub a1: Matrix2<f64>,
    pub a2: Matrix2<f64>,
    /// `(delta^2 - gamma) / (gamma + delta)^2`
    pub a_nl: f64,
    pub family: BoussinesqFamily,
}

impl BoussinesqOps {
    pub fn new(gamma: f64, delta: f64, bo_inv: f64, family: BoussinesqFamily) -> Result<Self> {
        check_gamma_delta(gamma, delta)?;
        if family.theta1 < 0.0 || family.theta2 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: "theta1 and theta2 must be non-negative".into(),
            });
        }
        if bo_inv < 0.0 {
            return Err(Error::InvalidParameter {
                name: "bo_inv",
                reason: "bo_inv must be non-negative".into(),
            });
        }
        let gd = gamma + delta;
        let nu = nu_gn(gamma, delta);
        let BoussinesqFamily {
            theta1,
            theta2,
            lambda1,
            lambda2,
        } = family;
        let a0 = Matrix2::new(0.0, 1.0 / gd, gd, 0.0);
        let a1 = Matrix2::new(
            (1.0 - lambda1) * theta2,
            0.0,
            0.0,
            (1.0 - lambda2) * (nu + theta1),
        );
        let a2 = Matrix2::new(
            0.0,
            (lambda1 * theta2 - theta1) / gd,
            -gd * bo_inv + gd * (lambda2 * (nu + theta1) - theta2),
            0.0,
        );
        Ok(Self {
            a0,
            a1,
            a2,
            a_nl: (delta * delta - gamma) / (gd * gd),
            family,
        })
    }

    /// Base member (all family parameters zero).
    pub fn base(gamma: f64, delta: f64, bo_inv: f64) -> Result<Self> {
        Self::new(gamma, delta, bo_inv, BoussinesqFamily::default())
    }

    /// `A[U]` at a point.
    pub fn nonlinear(&self, zeta: f64, v: f64) -> Matrix2<f64> {
        self.a_nl * Matrix2::new(v, zeta, 0.0, v)
    }
}

/// Matrices of the symmetric Boussinesq system
/// `(S0 + eps S[U] - mu S1 d_xx) U_t + (Sigma0 + eps Sigma[U] - mu Sigma1 d_xx) U_x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymBoussinesqOps {
    pub s0: Matrix2<f64>,
    pub t: Matrix2<f64>,
    pub s1: Matrix2<f64>,
    pub sigma0: Matrix2<f64>,
    pub sigma1: Matrix2<f64>,
    /// prefactor of `S[U]`: `(delta^2 - gamma) / (gamma + delta)^2`
    pub s_nl: f64,
    /// prefactor of `Sigma[U]`: `(delta^2 - gamma) / (gamma + delta)`
    pub sigma_nl: f64,
    pub gd: f64,
}

impl SymBoussinesqOps {
    pub fn new(gamma: f64, delta: f64, bo_inv: f64) -> Result<Self> {
        let base = BoussinesqOps::base(gamma, delta, bo_inv)?;
        let gd = gamma + delta;
        let crit = delta * delta - gamma;
        let s0 = Matrix2::new(gd, 0.0, 0.0, 1.0 / gd);
        let t = Matrix2::new(gd * (1.0 + bo_inv), 0.0, 0.0, 1.0 / gd);
        Ok(Self {
            s0,
            t,
            s1: s0 * base.a1 + t,
            sigma0: Matrix2::new(0.0, 1.0, 1.0, 0.0),
            sigma1: Matrix2::new(0.0, 1.0 + bo_inv, 1.0 + bo_inv, 0.0),
            s_nl: crit / (gd * gd),
            sigma_nl: crit / gd,
            gd,
        })
    }

    /// `S[U]` at a point.
    pub fn s_of(&self, zeta: f64, _v: f64) -> Matrix2<f64> {
        self.s_nl * Matrix2::new(0.0, 0.0, 0.0, zeta)
    }

    /// `Sigma[U]` at a point.
    pub fn sigma_of(&self, zeta: f64, v: f64) -> Matrix2<f64> {
        self.sigma_nl * Matrix2::new(v, zeta, zeta, v / (self.gd * self.gd))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClVariant {
    Unidirectional,
    Decoupled,
}

/// Coefficients of the Constantin-Lannes scalar equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClCoeffs {
    pub variant: ClVariant,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub nu_x: f64,
    pub nu_t: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub theta: f64,
    pub lambda: f64,
    /// `nu_t > 0`; an inadmissible set can still be used for residual checks.
    pub admissible: bool,
}

impl ClCoeffs {
    pub fn new(variant: ClVariant, gamma: f64, delta: f64, theta: f64, lambda: f64) -> Result<Self> {
        check_gamma_delta(gamma, delta)?;
        let gd = gamma + delta;
        let crit = delta * delta - gamma;
        let one_gd = 1.0 + gamma * delta;
        let base = one_gd / (6.0 * delta * gd);
        let alpha1 = 1.5 * crit / gd;
        let (alpha2, alpha3, nu_x, nu_t, kappa1, kappa2) = match variant {
            ClVariant::Unidirectional => {
                let alpha2 = 21.0 * crit * crit / (8.0 * gd * gd) - 3.0 * (delta.powi(3) + gamma) / gd;
                let alpha3 = 71.0 * crit.powi(3) / (16.0 * gd.powi(3))
                    - 37.0 * crit * (delta.powi(3) + gamma) / (4.0 * gd * gd)
                    + 5.0 * (delta.powi(4) - gamma) / gd;
                let kappa1 = (14.0 - 6.0 * (theta + lambda)) * crit * one_gd / (24.0 * delta * gd * gd)
                    - (1.0 - gamma) / (6.0 * gd);
                let kappa2 = (17.0 - 12.0 * theta) * crit * one_gd / (48.0 * delta * gd * gd)
                    - (1.0 - gamma) / (12.0 * gd);
                (
                    alpha2,
                    alpha3,
                    (1.0 - theta - lambda) * base,
                    (theta + lambda) * base,
                    kappa1,
                    kappa2,
                )
            }
            ClVariant::Decoupled => {
                let d1 = (delta + 1.0).powi(2);
                let alpha2 = -3.0 * gamma * delta * d1 / (gd * gd);
                let alpha3 = -5.0 * delta * delta * d1 * gamma * (1.0 - gamma) / gd.powi(3);
                let common = one_gd * crit / (3.0 * delta * gd * gd) * (1.0 + (1.0 - theta) / 4.0);
                let kappa1 = common - (1.0 - gamma) / (6.0 * gd) + lambda * 1.5 * crit / gd;
                let kappa2 = common - (1.0 - gamma) / (12.0 * gd);
                (
                    alpha2,
                    alpha3,
                    (1.0 - theta) * base - lambda,
                    theta * base + lambda,
                    kappa1,
                    kappa2,
                )
            }
        };
        Ok(Self {
            variant,
            alpha1,
            alpha2,
            alpha3,
            nu_x,
            nu_t,
            kappa1,
            kappa2,
            theta,
            lambda,
            admissible: nu_t > 0.0,
        })
    }

    pub fn require_admissible(&self) -> Result<()> {
        if self.admissible {
            Ok(())
        } else {
            Err(Error::Inadmissible(format!(
                "nu_t = {} must be positive for time stepping",
                self.nu_t
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-14 * (1.0 + b.abs())
    }

    #[test]
    fn regime_examples() {
        let b = RegimeBounds {
            m: 1.0,
            ..Default::default()
        };
        let p = Params::new(0.5, 0.1, 0.0, 0.01, 1.0);
        assert_eq!(regime_of(&p, &b), vec![Regime::SW, Regime::CH]);

        let flat = Params::new(0.3, 0.0, 0.0, 0.2, 2.0);
        assert_eq!(regime_of(&flat, &b), vec![Regime::SW, Regime::CH, Regime::LW]);

        let deep = Params::new(0.5, 0.1, 0.0, 2.0 * b.mu_max, 1.0);
        assert!(regime_of(&deep, &b).is_empty());
    }

    #[test]
    fn chgn_examples() {
        let c = ChgnCoeffs::new(0.0, 1.0).unwrap();
        for (got, want) in [
            (c.nu, 1.0 / 3.0),
            (c.alpha, 1.0),
            (c.beta_c, 1.0),
            (c.kappa1, 1.0),
            (c.kappa2, 3.0),
            (c.varsigma, 1.0),
        ] {
            assert!(close(got, want), "{got} vs {want}");
        }
        let c = ChgnCoeffs::new(0.5, 1.0).unwrap();
        for (got, want) in [
            (c.nu, 1.0 / 3.0),
            (c.alpha, 2.0 / 9.0),
            (c.beta_c, 2.0 / 9.0),
            (c.kappa1, 1.0 / 3.0),
            (c.kappa2, 1.0),
            (c.varsigma, 2.0 / 9.0),
        ] {
            assert!(close(got, want), "{got} vs {want}");
        }
        let c = ChgnCoeffs::new(0.25, 0.5).unwrap();
        assert_eq!(c.beta_c, 0.0);
        assert_eq!(c.kappa2, 0.0);
        assert!(ChgnCoeffs::new(1.0, 1.0).is_err());
        assert!(ChgnCoeffs::new(0.5, 0.0).is_err());
    }

    #[test]
    fn boussinesq_examples() {
        let o = BoussinesqOps::base(0.0, 1.0, 0.0).unwrap();
        assert_eq!(o.a1, Matrix2::new(0.0, 0.0, 0.0, 1.0 / 3.0));
        assert_eq!(o.a2, Matrix2::zeros());
        assert_eq!(o.a0[(0, 1)], 1.0);
        assert_eq!(o.a0[(1, 0)], 1.0);
        let o = BoussinesqOps::base(0.0, 1.0, 1.0).unwrap();
        assert_eq!(o.a2[(1, 0)], -1.0);
        let o = BoussinesqOps::base(0.25, 0.5, 0.3).unwrap();
        assert_eq!(o.a_nl, 0.0);
        assert_eq!(o.nonlinear(0.7, -0.4), Matrix2::zeros());
        let neg = BoussinesqFamily {
            theta1: -0.1,
            ..Default::default()
        };
        assert!(BoussinesqOps::new(0.1, 1.0, 0.0, neg).is_err());
    }

    #[test]
    fn symmetric_boussinesq_examples() {
        let s = SymBoussinesqOps::new(0.0, 1.0, 0.0).unwrap();
        assert!((s.s1 - Matrix2::new(1.0, 0.0, 0.0, 4.0 / 3.0)).abs().max() < 1e-15);
        let eig = s.sigma0.symmetric_eigen().eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        assert!((lo + 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        let crit = SymBoussinesqOps::new(0.25, 0.5, 0.0).unwrap();
        assert_eq!(crit.sigma_of(0.3, 0.2), Matrix2::zeros());
    }

    #[test]
    fn cl_examples() {
        let u = ClCoeffs::new(ClVariant::Unidirectional, 0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(close(u.alpha1, 1.5));
        for variant in [ClVariant::Unidirectional, ClVariant::Decoupled] {
            let c = ClCoeffs::new(variant, 0.25, 0.5, 0.3, 0.1).unwrap();
            assert_eq!(c.alpha1, 0.0);
        }
        let d = ClCoeffs::new(ClVariant::Decoupled, 0.0, 1.3, 0.4, 0.2).unwrap();
        assert_eq!(d.alpha2, 0.0);
        assert_eq!(d.alpha3, 0.0);
        let z = ClCoeffs::new(ClVariant::Unidirectional, 0.2, 1.1, 0.0, 0.0).unwrap();
        assert_eq!(z.nu_t, 0.0);
        assert!(!z.admissible);
        assert!(z.require_admissible().is_err());
    }

    proptest! {
        #[test]
        fn chgn_dual_forms(gamma in 0.0..0.99f64, delta in 0.1..10.0f64) {
            let c = ChgnCoeffs::new(gamma, delta).unwrap();
            let gd = gamma + delta;
            let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
            prop_assert!(rel(c.kappa1, gd * (2.0 * c.beta_c - c.alpha) / (3.0 * c.nu)));
            prop_assert!(rel(c.kappa2, gd * c.beta_c / c.nu));
            prop_assert!(rel(c.varsigma, (2.0 * c.alpha - c.beta_c) / (3.0 * c.nu)));
            prop_assert!(c.nu > 0.0);
        }

        #[test]
        fn cl_dispersion_sum_is_family_invariant(
            gamma in 0.0..0.99f64, delta in 0.1..10.0f64,
            theta in -2.0..2.0f64, lambda in -2.0..2.0f64,
        ) {
            let want = (1.0 + gamma * delta) / (6.0 * delta * (gamma + delta));
            for variant in [ClVariant::Unidirectional, ClVariant::Decoupled] {
                let c = ClCoeffs::new(variant, gamma, delta, theta, lambda).unwrap();
                prop_assert!((c.nu_x + c.nu_t - want).abs() <= 1e-12 * (1.0 + want));
            }
        }

        #[test]
        fn breve_family_reduces_to_tilde(
            gamma in 0.0..0.99f64, delta in 0.1..10.0f64,
            theta in 0.0..2.0f64, bo_inv in 0.0..3.0f64,
        ) {
            let fam = BoussinesqFamily { theta1: theta, theta2: theta, lambda1: 0.0, lambda2: 0.0 };
            let o = BoussinesqOps::new(gamma, delta, bo_inv, fam).unwrap();
            let gd = gamma + delta;
            let nu = nu_gn(gamma, delta);
            let a1 = Matrix2::new(theta, 0.0, 0.0, nu + theta);
            let a2 = Matrix2::new(0.0, -theta / gd, -gd * bo_inv - theta * gd, 0.0);
            prop_assert!((o.a1 - a1).abs().max() <= 1e-13 * (1.0 + nu + theta));
            prop_assert!((o.a2 - a2).abs().max() <= 1e-13 * (1.0 + gd * (bo_inv + theta)));
        }

        #[test]
        fn symmetric_mass_matrices_are_positive(
            gamma in 0.0..0.99f64, delta in 0.1..10.0f64, bo_inv in 0.0..5.0f64,
        ) {
            let s = SymBoussinesqOps::new(gamma, delta, bo_inv).unwrap();
            prop_assert!(s.s0.symmetric_eigen().eigenvalues.min() > 0.0);
            prop_assert!(s.s1.symmetric_eigen().eigenvalues.min() > 0.0);
            prop_assert!((s.sigma_of(0.3, -0.2) - s.sigma_of(0.3, -0.2).transpose()).abs().max() == 0.0);
        }
    }
}
