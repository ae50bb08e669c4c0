use crate::error::Result;
use crate::operators::{DepthFields, Mft};
use crate::params::{ChgnCoeffs, Params};
use crate::spectral::{dealias, dx};

use super::sw::{kinetic_coefficient, mass_tendency_1d};
use super::{State, VelocityRole};

/// Camassa-Holm regime Green-Naghdi system in `(zeta, v)`.
pub fn chgn1d_rhs(s: &State, p: &Params, c: &ChgnCoeffs, tol: f64) -> Result<State> {
    let d = DepthFields::new(&s.zeta, None, p)?;
    let mft = Mft::new(&s.zeta, c, p)?;
    let v = s.v();
    let vx = dx(v);
    let zt = mass_tendency_1d(&d, v);

    let coef = kinetic_coefficient(&d, p.gamma).map(|k| k - c.varsigma);
    let quad = dx(&dealias(&(&coef * &(v * v))));
    let slope = dx(&dealias(&(&vx * &vx)));
    let f = dealias(&(&mft.q1 * &dx(&s.zeta)))
        .scale(-p.gd())
        .axpy(-0.5 * p.epsilon, &dealias(&(&mft.q1 * &quad)))
        .axpy(-p.mu * p.epsilon * 2.0 / 3.0 * c.alpha, &slope);
    let (solved, _) = mft.solve(&f, tol)?;
    let vt = solved.axpy(-p.epsilon * c.varsigma, &dealias(&(v * &vx)));
    State::new_1d(zt, vt, VelocityRole::ShearMeanV)
}
