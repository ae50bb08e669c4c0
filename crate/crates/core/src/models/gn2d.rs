use crate::error::{Error, Result};
use crate::operators::{curvature_term, n0_with, q_operator, t_operator, DepthFields, NeumannOptions};
use crate::params::Params;
use crate::spectral::{dealias, div, grad, Field, VecField};

/// Pieces of the momentum equation at one interface position.
struct Momentum {
    /// `u2 - gamma u1 + mu (delta Q[xi2](h2 T u2) - gamma Q[xi1](h1 T u1))`
    m_v: VecField,
    /// `(I + mu delta Q[xi2] h2 T) u2`
    big_u2: VecField,
    /// `(I + mu Q[xi1] h1 T) u1`
    big_u1: VecField,
    n0: Field,
}

fn momentum(zeta: &Field, v: &VecField, p: &Params, b: Option<&Field>, opts: NeumannOptions) -> Result<Momentum> {
    let d = DepthFields::new(zeta, b, p)?;
    let bb = b.map(|b| b.scale(p.beta));
    let flux = v.mul_scalar(&d.mobility());
    let xi1 = zeta.scale(-p.epsilon);
    let xi2 = d.h2.map(|h| p.delta * h - 1.0);
    let u1 = -q_operator(&xi1, &flux, opts)?.0;
    let u2 = q_operator(&xi2, &flux, opts)?.0.scale(p.delta);
    let t2 = t_operator(&d.h2, bb.as_ref(), &u2)?;
    let c2 = q_operator(&xi2, &t2.mul_scalar(&d.h2), opts)?.0.scale(p.delta);
    let t1 = t_operator(&d.h1, None, &u1)?;
    let c1 = q_operator(&xi1, &t1.mul_scalar(&d.h1), opts)?.0;
    let m_v = &u2.axpy(-p.gamma, &u1) + &c2.axpy(-p.gamma, &c1).scale(p.mu);
    let n0 = n0_with(&d, b, &u1, &u2, p);
    Ok(Momentum {
        m_v,
        big_u2: u2.axpy(p.mu, &c2),
        big_u1: u1.axpy(p.mu, &c1),
        n0,
    })
}

/// The operator image under the time derivative of the momentum equation.
pub fn gn_momentum_operator(
    zeta: &Field,
    v: &VecField,
    p: &Params,
    b: Option<&Field>,
    opts: NeumannOptions,
) -> Result<VecField> {
    Ok(momentum(zeta, v, p, b, opts)?.m_v)
}

/// `-div(h1 h2 v / (h1 + gamma h2))`
pub fn gn2d_mass_tendency(zeta: &Field, v: &VecField, p: &Params, b: Option<&Field>) -> Result<Field> {
    let d = DepthFields::new(zeta, b, p)?;
    Ok(-div(&v.mul_scalar(&d.mobility()).map_comps(dealias)))
}

/// Residuals of the nonlocal Green-Naghdi system after substituting the
/// supplied time derivatives.
///
/// The time derivative of the operator image is split as
/// `M[zeta] v_t + (M[zeta + dt_fd zeta_t] v - M[zeta] v) / dt_fd`.
/// Works on 1D grids as well, where it is the literal reduction.
#[allow(clippy::too_many_arguments)]
pub fn gn2d_residual(
    zeta: &Field,
    v: &VecField,
    zeta_t: &Field,
    v_t: &VecField,
    p: &Params,
    b: Option<&Field>,
    dt_fd: f64,
    opts: NeumannOptions,
) -> Result<(Field, VecField)> {
    if !(dt_fd > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt_fd",
            reason: "finite-difference spacing must be positive".into(),
        });
    }
    let grid = zeta.grid();
    if v.grid() != grid || v_t.grid() != grid || zeta_t.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let mass = zeta_t - &gn2d_mass_tendency(zeta, v, p, b)?;

    let now = momentum(zeta, v, p, b, opts)?;
    let later = gn_momentum_operator(&zeta.axpy(dt_fd, zeta_t), v, p, b, opts)?;
    let frozen = gn_momentum_operator(zeta, v_t, p, b, opts)?;
    let dt_m = &frozen + &(&later - &now.m_v).scale(1.0 / dt_fd);

    let kinetic = &now.big_u2.dot(&now.big_u2) - &now.big_u1.dot(&now.big_u1).scale(p.gamma);
    let mut res = &dt_m + &grad(zeta).scale(p.gd());
    res = &res + &grad(&dealias(&kinetic)).scale(0.5 * p.epsilon);
    res = &res - &grad(&dealias(&now.n0)).scale(p.mu * p.epsilon);
    if p.bond_inv > 0.0 {
        res = &res - &curvature_term(zeta, p);
    }
    Ok((mass, res))
}
