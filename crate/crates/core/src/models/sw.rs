use crate::error::{Error, Result};
use crate::operators::{curvature_term, r_operator_with, DepthFields, NeumannOptions};
use crate::params::Params;
use crate::spectral::{dealias, deriv, div, dx, grad, laplacian, Field, VecField};

use super::{State, VelocityRole};

pub const HYPERBOLICITY_CONDITION: &str = "shallow-water hyperbolicity margin";

/// `(h1^2 - gamma h2^2) / (h1 + gamma h2)^2`
pub(crate) fn kinetic_coefficient(d: &DepthFields, gamma: f64) -> Field {
    let num = (&d.h1 * &d.h1).axpy(-gamma, &(&d.h2 * &d.h2));
    num.zip_map(&d.total, |n, t| n / (t * t))
}

/// `-d_x(h1 h2 v / (h1 + gamma h2))`
pub(crate) fn mass_tendency_1d(d: &DepthFields, v: &Field) -> Field {
    -dx(&dealias(&(&d.mobility() * v)))
}

/// `-(gamma+delta) zeta_x - eps/2 d_x(coef v^2)`
pub(crate) fn sw_momentum_1d(d: &DepthFields, zeta: &Field, v: &Field, p: &Params) -> Field {
    let coef = kinetic_coefficient(d, p.gamma);
    let quad = dx(&dealias(&(&coef * &(v * v))));
    dx(zeta).scale(-p.gd()).axpy(-0.5 * p.epsilon, &quad)
}

pub fn sw1d_rhs(s: &State, p: &Params, b: Option<&Field>) -> Result<State> {
    let d = DepthFields::new(&s.zeta, b, p)?;
    let v = s.v();
    let zt = mass_tendency_1d(&d, v);
    let mut vt = sw_momentum_1d(&d, &s.zeta, v, p);
    if p.bond_inv > 0.0 {
        vt = vt.axpy(p.gd() * p.bond_inv, &deriv(&s.zeta, 0, 3));
    }
    State::new_1d(zt, vt, VelocityRole::ShearMeanV)
}

pub(crate) fn hyperbolicity_argmin(d: &DepthFields, v: &Field, p: &Params) -> (f64, usize) {
    let e2 = p.epsilon * p.epsilon;
    let gd = p.gd();
    let vals: Vec<f64> = (0..v.values().len())
        .map(|i| {
            let (h1, h2, t) = (d.h1.values()[i], d.h2.values()[i], d.total.values()[i]);
            let vi = v.values()[i];
            gd - p.gamma * e2 * (h1 + h2).powi(2) * vi * vi / t.powi(3)
        })
        .collect();
    vals.iter()
        .copied()
        .enumerate()
        .fold((f64::INFINITY, 0), |(m, im), (i, x)| if x < m { (x, i) } else { (m, im) })
}

/// Minimum of `gamma + delta - gamma eps^2 (h1 + h2)^2 v^2 / (h1 + gamma h2)^3`.
pub fn sw1d_hyperbolicity(s: &State, p: &Params, b: Option<&Field>) -> Result<f64> {
    let d = DepthFields::new(&s.zeta, b, p)?;
    Ok(hyperbolicity_argmin(&d, s.v(), p).0)
}

pub fn sw2d_rhs(s: &State, p: &Params, b: Option<&Field>, opts: NeumannOptions) -> Result<State> {
    if s.grid().dim() != 2 {
        return Err(Error::WrongState {
            model: "SW2D",
            expected: "a two-dimensional grid",
        });
    }
    let d = DepthFields::new(&s.zeta, b, p)?;
    let big_v = s.velocity();
    let (rv, _) = r_operator_with(&d, p, &big_v, opts)?;
    let flux = rv.mul_scalar(&d.h1).map_comps(dealias);
    let zt = -div(&flux);
    let upper = big_v.axpy(-p.gamma, &rv);
    let kinetic = &upper.dot(&upper) - &rv.dot(&rv).scale(p.gamma);
    let mut vt = &grad(&s.zeta).scale(-p.gd()) + &grad(&dealias(&kinetic)).scale(-0.5 * p.epsilon);
    if p.bond_inv > 0.0 {
        vt = vt.axpy(p.gd() * p.bond_inv, &grad(&laplacian(&s.zeta)));
    }
    State::new_vec(zt, vt, VelocityRole::ShearV)
}

/// Nonlinear surface-tension forcing along x.
pub(crate) fn curvature_1d(zeta: &Field, p: &Params) -> Option<Field> {
    (p.bond_inv > 0.0).then(|| curvature_term(zeta, p).into_comps().remove(0))
}

#[allow(dead_code)]
fn _assert_vecfield(_: &VecField) {}
