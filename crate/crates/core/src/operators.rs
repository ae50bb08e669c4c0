//! Spatial operators shared by the model right-hand sides.
//!
//! None of these operators dealias internally: the Neumann series and the
//! elliptic solves must invert the discrete operator exactly. Truncation of
//! nonlinear fluxes is applied by the models.

use crate::error::{Error, Result};
use crate::params::{ChgnCoeffs, Params};
use crate::solvers::{pcg, SolveStats};
use crate::spectral::{div, dx, grad, helmholtz_inverse_odd, laplacian, project_gradient, Field, VecField};

pub const H1_CONDITION: &str = "(H1) h₁ = 1−εζ";
pub const H2_CONDITION: &str = "(H1) h₂ = 1/δ+εζ−βb";
pub const ELLIPTIC_K1: &str = "(H2) 1+εκ₁ζ";
pub const ELLIPTIC_K2: &str = "(H2) 1+εκ₂ζ";

/// Error unless `f > 0` everywhere.
pub fn check_positive(f: &Field, condition: &'static str) -> Result<()> {
    let (min, node) = f.argmin();
    if min > 0.0 {
        Ok(())
    } else {
        Err(Error::Depth { condition, min, node })
    }
}

/// Layer depths and the coefficient of the shear velocity definition.
#[derive(Debug, Clone)]
pub struct DepthFields {
    pub h1: Field,
    pub h2: Field,
    /// `(gamma + delta) h1 h2 / (h1 + gamma h2) - 1`
    pub xi: Field,
    /// `h1 + gamma h2`
    pub total: Field,
}

impl DepthFields {
    /// `b` is the unscaled topography; it enters as `beta * b`.
    pub fn new(zeta: &Field, b: Option<&Field>, p: &Params) -> Result<Self> {
        let eps = p.epsilon;
        let h1 = zeta.map(|z| 1.0 - eps * z);
        let mut h2 = zeta.map(|z| 1.0 / p.delta + eps * z);
        if let Some(b) = b {
            if !b.same_grid(zeta) {
                return Err(Error::GridMismatch);
            }
            h2 = h2.axpy(-p.beta, b);
        }
        check_positive(&h1, H1_CONDITION)?;
        check_positive(&h2, H2_CONDITION)?;
        let total = h1.axpy(p.gamma, &h2);
        let gd = p.gd();
        let xi = h1.zip_map(&h2, |a, c| gd * a * c / (a + p.gamma * c) - 1.0);
        Ok(Self { h1, h2, xi, total })
    }

    /// `min(h1, h2)` over the grid.
    pub fn min_depth(&self) -> f64 {
        self.h1.min().min(self.h2.min())
    }

    /// `h1 h2 / (h1 + gamma h2)`
    pub fn mobility(&self) -> Field {
        (&self.h1 * &self.h2).zip_map(&self.total, |a, t| a / t)
    }
}

/// `T[h,b]V = -1/(3h) grad(h^3 div V) + 1/(2h) [grad(h^2 grad b . V) - h^2 grad b div V] + grad b (grad b . V)`
pub fn t_operator(h: &Field, b: Option<&Field>, v: &VecField) -> Result<VecField> {
    check_positive(h, "h > 0")?;
    let divv = div(v);
    let h3 = h.map(|x| x * x * x);
    let mut out = grad(&(&h3 * &divv)).mul_scalar(&h.map(|x| -1.0 / (3.0 * x)));
    if let Some(b) = b {
        let gb = grad(b);
        let gbv = gb.dot(v);
        let hsq = h.map(|x| x * x);
        let bracket = &grad(&(&hsq * &gbv)) - &gb.mul_scalar(&(&hsq * &divv));
        out = &out + &bracket.mul_scalar(&h.map(|x| 0.5 / x));
        out = &out + &gb.mul_scalar(&gbv);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannOptions {
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_terms: 200,
        }
    }
}

/// L2 norms of the successive series terms.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannStats {
    pub increments: Vec<f64>,
}

impl NeumannStats {
    pub fn terms(&self) -> usize {
        self.increments.len()
    }

    /// Largest ratio between consecutive increments.
    pub fn max_ratio(&self) -> f64 {
        self.increments
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }
}

/// `Q[xi]W`: the gradient field `V` with `div((1 + xi) V) = div W`.
pub fn q_operator(xi: &Field, w: &VecField, opts: NeumannOptions) -> Result<(VecField, NeumannStats)> {
    if !xi.same_grid(w.comp(0)) {
        return Err(Error::GridMismatch);
    }
    let xi_max = xi.sup_norm();
    if xi_max >= 1.0 {
        return Err(Error::Contraction { xi_max });
    }
    let w_norm = w.l2_norm();
    let mut term = project_gradient(w);
    let mut sum = term.clone();
    let mut increments = vec![term.l2_norm()];
    if w_norm == 0.0 || increments[0] <= opts.tol * w_norm {
        return Ok((sum, NeumannStats { increments }));
    }
    for _ in 1..opts.max_terms {
        term = project_gradient(&term.mul_scalar(xi)).scale(-1.0);
        let n = term.l2_norm();
        sum = &sum + &term;
        increments.push(n);
        if n <= opts.tol * w_norm {
            return Ok((sum, NeumannStats { increments }));
        }
    }
    Err(Error::IterationLimit {
        solver: "Neumann series",
        iterations: opts.max_terms,
        residual: increments.last().copied().unwrap_or(0.0) / w_norm,
    })
}

/// The gradient field `V` with `div((h1 + gamma h2) V) = div(h2 W)`.
pub fn r_operator(
    zeta: &Field,
    b: Option<&Field>,
    p: &Params,
    w: &VecField,
    opts: NeumannOptions,
) -> Result<(VecField, NeumannStats)> {
    let d = DepthFields::new(zeta, b, p)?;
    r_operator_with(&d, p, w, opts)
}

pub(crate) fn r_operator_with(
    d: &DepthFields,
    p: &Params,
    w: &VecField,
    opts: NeumannOptions,
) -> Result<(VecField, NeumannStats)> {
    let flat = 1.0 + p.gamma / p.delta;
    let xi = d.total.map(|t| t / flat - 1.0);
    q_operator(&xi, &w.mul_scalar(&d.h2).scale(1.0 / flat), opts)
}

/// Flat-bottom Green-Naghdi operator `Qbar[h1,h2]v` (1D).
pub fn qbar(h1: &Field, h2: &Field, gamma: f64, v: &Field) -> Field {
    let (ta, tc, _, _) = qbar_parts(h1, h2, gamma, v);
    let lhs = &(h1 * &ta) + &(h2 * &tc).scale(gamma);
    lhs.zip_map(&(h1 * h2), |l, hh| -l / (3.0 * hh))
}

/// Flat-bottom Green-Naghdi nonlinearity `Rbar[h1,h2]v` (1D).
pub fn rbar(h1: &Field, h2: &Field, gamma: f64, v: &Field) -> Field {
    let (ta, tc, a, c) = qbar_parts(h1, h2, gamma, v);
    let sa = h2 * &dx(&a);
    let sc = h1 * &dx(&c);
    let squares = (&(&sa * &sa) - &(&sc * &sc).scale(gamma)).scale(0.5);
    let total = h1.axpy(gamma, h2);
    let bracket = &(&(h1 * &ta) / h2) - &(&(h2 * &tc) / h1).scale(gamma);
    let weight = v.zip_map(&total, |x, t| x / (3.0 * t));
    &squares + &(&weight * &bracket)
}

fn qbar_parts(h1: &Field, h2: &Field, gamma: f64, v: &Field) -> (Field, Field, Field, Field) {
    let total = h1.axpy(gamma, h2);
    let a = (h1 * v).zip_map(&total, |x, t| x / t);
    let c = (h2 * v).zip_map(&total, |x, t| x / t);
    let ta = dx(&(&h2.map(|x| x.powi(3)) * &dx(&a)));
    let tc = dx(&(&h1.map(|x| x.powi(3)) * &dx(&c)));
    (ta, tc, a, c)
}

/// The elliptic operator `T[eps zeta]V = q1 V - mu nu d_x(q2 d_x V)` of the
/// Camassa-Holm regime system, with `q_i = 1 + eps kappa_i zeta`.
#[derive(Debug, Clone)]
pub struct Mft {
    pub q1: Field,
    pub q2: Field,
    pub mu_nu: f64,
}

impl Mft {
    pub fn new(zeta: &Field, c: &ChgnCoeffs, p: &Params) -> Result<Self> {
        let q1 = zeta.map(|z| 1.0 + p.epsilon * c.kappa1 * z);
        let q2 = zeta.map(|z| 1.0 + p.epsilon * c.kappa2 * z);
        let (m1, n1) = q1.argmin();
        let (m2, n2) = q2.argmin();
        if m1 <= 0.0 || m2 <= 0.0 {
            let (condition, min, node) = if m2 <= m1 {
                (ELLIPTIC_K2, m2, n2)
            } else {
                (ELLIPTIC_K1, m1, n1)
            };
            return Err(Error::Ellipticity { condition, min, node });
        }
        Ok(Self {
            q1,
            q2,
            mu_nu: p.mu * c.nu,
        })
    }

    /// `min(q1, q2)` over the grid.
    pub fn margin(&self) -> f64 {
        self.q1.min().min(self.q2.min())
    }

    pub fn apply(&self, v: &Field) -> Field {
        let flux = &self.q2 * &dx(v);
        (&self.q1 * v).axpy(-self.mu_nu, &dx(&flux))
    }

    /// Solve `T U = F` to relative residual `tol`.
    pub fn solve(&self, f: &Field, tol: f64) -> Result<(Field, SolveStats)> {
        let mu_nu = self.mu_nu;
        pcg(
            "𝔗 conjugate gradient",
            |u| self.apply(u),
            |r| helmholtz_inverse_odd(mu_nu, r),
            f,
            None,
            tol,
            500,
        )
    }
}

pub fn mft_apply(zeta: &Field, c: &ChgnCoeffs, p: &Params, v: &Field) -> Result<Field> {
    Ok(Mft::new(zeta, c, p)?.apply(v))
}

pub fn mft_solve(zeta: &Field, c: &ChgnCoeffs, p: &Params, f: &Field, tol: f64) -> Result<Field> {
    Ok(Mft::new(zeta, c, p)?.solve(f, tol)?.0)
}

/// `(gamma+delta)/Bo * div(grad zeta / sqrt(1 + a^2 |grad zeta|^2))` with
/// `a = eps sqrt(mu)`; its gradient is the surface-tension forcing.
pub fn curvature_potential(zeta: &Field, p: &Params) -> Field {
    let coef = p.gd() * p.bond_inv;
    if coef == 0.0 {
        return Field::zeros(*zeta.grid());
    }
    let a = p.epsilon * p.mu.sqrt();
    if a < 1e-8 {
        return laplacian(zeta).scale(coef);
    }
    let g = grad(zeta);
    let weight = g.dot(&g).map(|s| 1.0 / (1.0 + a * a * s).sqrt());
    div(&g.mul_scalar(&weight)).scale(coef)
}

/// Surface-tension forcing `-(gamma+delta)/Bo * grad(k(a zeta)) / a`.
pub fn curvature_term(zeta: &Field, p: &Params) -> VecField {
    grad(&curvature_potential(zeta, p))
}

/// `N0 = ((-h2 div u2 + beta grad b . u2)^2 - gamma (h1 div u1)^2) / 2`
pub fn n0_nonlinear(
    zeta: &Field,
    b: Option<&Field>,
    u1: &VecField,
    u2: &VecField,
    p: &Params,
) -> Result<Field> {
    let d = DepthFields::new(zeta, b, p)?;
    Ok(n0_with(&d, b, u1, u2, p))
}

pub(crate) fn n0_with(d: &DepthFields, b: Option<&Field>, u1: &VecField, u2: &VecField, p: &Params) -> Field {
    let mut a = -&(&d.h2 * &div(u2));
    if let Some(b) = b {
        a = a.axpy(p.beta, &grad(b).dot(u2));
    }
    let c = &d.h1 * &div(u1);
    (&(&a * &a) - &(&c * &c).scale(p.gamma)).scale(0.5)
}

/// One-dimensional nonlinearity `R0` of the Green-Naghdi system with topography.
pub fn r0_1d(zeta: &Field, b: Option<&Field>, v: &Field, p: &Params) -> Result<Field> {
    let d = DepthFields::new(zeta, b, p)?;
    let bb = b.map(|b| b.scale(p.beta));
    r0_with(&d, bb.as_ref(), v, p)
}

/// `R0` given depths and the already scaled topography `beta b`.
pub(crate) fn r0_with(d: &DepthFields, beta_b: Option<&Field>, v: &Field, p: &Params) -> Result<Field> {
    let gamma = p.gamma;
    let u2 = (&d.h1 * v) / &d.total;
    let u1 = -&((&d.h2 * v) / &d.total);
    let mut a = -&(&d.h2 * &dx(&u2));
    if let Some(bb) = beta_b {
        a = &a + &(&dx(bb) * &u2);
    }
    let c = &d.h1 * &dx(&u1);
    let t2 = t_operator(&d.h2, beta_b, &VecField::from_scalar(u2.clone()))?;
    let t1 = t_operator(&d.h1, None, &VecField::from_scalar(u1.clone()))?;
    let squares = (&(&a * &a) - &(&c * &c).scale(gamma)).scale(0.5);
    Ok(&(&squares - &(&u2 * t2.comp(0))) + &(&u1 * t1.comp(0)).scale(gamma))
}
