use crate::error::{Error, Result};
use crate::params::{BoussinesqFamily, BoussinesqOps, Params, SymBoussinesqOps};
use crate::solvers::pcg;
use crate::spectral::{apply_radial, dealias, deriv, dx, dxx, Field};

use super::{State, VelocityRole};

pub const BOUSS_MASS_CONDITION: &str = "1 − μĂ₁∂x² positive";
pub const SYM_MASS_CONDITION: &str = "1/(γ+δ) + εS[U] positive";

fn max_k2(g: &crate::spectral::Grid) -> f64 {
    let k = g.k_even(0, g.n(0) / 2);
    k * k
}

/// `v -> (I - mu theta1 d_xx)^{-1} (I - mu theta2 d_xx) v`
pub fn boussinesq_from_primitive(v: &Field, p: &Params, f: &BoussinesqFamily) -> Field {
    if f.theta1 == 0.0 && f.theta2 == 0.0 {
        return v.clone();
    }
    apply_radial(v, |k2| (1.0 + p.mu * f.theta2 * k2) / (1.0 + p.mu * f.theta1 * k2))
}

pub fn boussinesq_to_primitive(v_theta: &Field, p: &Params, f: &BoussinesqFamily) -> Field {
    if f.theta1 == 0.0 && f.theta2 == 0.0 {
        return v_theta.clone();
    }
    apply_radial(v_theta, |k2| (1.0 + p.mu * f.theta1 * k2) / (1.0 + p.mu * f.theta2 * k2))
}

/// Boussinesq family; the mass operator is inverted exactly per mode.
pub fn boussinesq_rhs(s: &State, p: &Params, ops: &BoussinesqOps) -> Result<State> {
    let (z, v) = (&s.zeta, s.v());
    let g = *z.grid();
    let (a0, a2) = (ops.a0, ops.a2);
    let zx = dx(z);
    let vx = dx(v);
    let zxxx = deriv(z, 0, 3);
    let vxxx = deriv(v, 0, 3);
    let nl_z = dx(&dealias(&(z * v))).scale(ops.a_nl);
    let nl_v = dx(&dealias(&(v * v))).scale(0.5 * ops.a_nl);

    let r_z = (&zx.scale(-a0[(0, 0)]) - &vx.scale(a0[(0, 1)]))
        .axpy(-p.epsilon, &nl_z)
        .axpy(-p.mu * a2[(0, 0)], &zxxx)
        .axpy(-p.mu * a2[(0, 1)], &vxxx);
    let r_v = (&zx.scale(-a0[(1, 0)]) - &vx.scale(a0[(1, 1)]))
        .axpy(-p.epsilon, &nl_v)
        .axpy(-p.mu * a2[(1, 0)], &zxxx)
        .axpy(-p.mu * a2[(1, 1)], &vxxx);

    let k2max = max_k2(&g);
    let mut out = Vec::with_capacity(2);
    for (i, r) in [r_z, r_v].into_iter().enumerate() {
        let m = ops.a1[(i, i)];
        let min = 1.0 + p.mu * m.min(0.0) * k2max;
        if min <= 0.0 {
            return Err(Error::MassIndefinite {
                condition: BOUSS_MASS_CONDITION,
                min,
            });
        }
        out.push(if m == 0.0 {
            r
        } else {
            apply_radial(&r, |k2| 1.0 / (1.0 + p.mu * m * k2))
        });
    }
    let vt = out.pop().expect("two rows");
    let zt = out.pop().expect("two rows");
    State::new_1d(zt, vt, VelocityRole::ShearMeanV)
}

/// `1/(gamma+delta) + eps s_nl zeta`, the pointwise part of the second mass row.
pub(crate) fn sym_mass_coefficient(zeta: &Field, p: &Params, ops: &SymBoussinesqOps) -> Field {
    zeta.map(|z| ops.s0[(1, 1)] + p.epsilon * ops.s_nl * z)
}

/// Symmetric Boussinesq system; the second mass row is solved by PCG.
pub fn sym_boussinesq_rhs(s: &State, p: &Params, ops: &SymBoussinesqOps, tol: f64) -> Result<State> {
    let (z, v) = (&s.zeta, s.v());
    let gd = ops.gd;
    let (sig0, sig1) = (ops.sigma0, ops.sigma1);
    let zx = dx(z);
    let vx = dx(v);
    let zxxx = deriv(z, 0, 3);
    let vxxx = deriv(v, 0, 3);
    let nl_z = dx(&dealias(&(z * v))).scale(ops.sigma_nl);
    let quad = (z * z).scale(0.5).axpy(0.5 / (gd * gd), &(v * v));
    let nl_v = dx(&dealias(&quad)).scale(ops.sigma_nl);

    let r_z = (&zx.scale(-sig0[(0, 0)]) - &vx.scale(sig0[(0, 1)]))
        .axpy(-p.epsilon, &nl_z)
        .axpy(p.mu * sig1[(0, 0)], &zxxx)
        .axpy(p.mu * sig1[(0, 1)], &vxxx);
    let r_v = (&zx.scale(-sig0[(1, 0)]) - &vx.scale(sig0[(1, 1)]))
        .axpy(-p.epsilon, &nl_v)
        .axpy(p.mu * sig1[(1, 0)], &zxxx)
        .axpy(p.mu * sig1[(1, 1)], &vxxx);

    let (s11, s22) = (ops.s1[(0, 0)], ops.s1[(1, 1)]);
    let zt = apply_radial(&r_z, |k2| 1.0 / (ops.s0[(0, 0)] + p.mu * s11 * k2));

    let q = sym_mass_coefficient(z, p, ops);
    let min = q.min();
    if min <= 0.0 {
        return Err(Error::MassIndefinite {
            condition: SYM_MASS_CONDITION,
            min,
        });
    }
    let flat = |r: &Field| apply_radial(r, |k2| 1.0 / (ops.s0[(1, 1)] + p.mu * s22 * k2));
    let vt = if p.epsilon == 0.0 || ops.s_nl == 0.0 {
        flat(&r_v)
    } else {
        let apply = |w: &Field| (&q * w).axpy(-p.mu * s22, &dxx(w));
        pcg("symmetric Boussinesq mass", apply, flat, &r_v, None, tol, 500)?.0
    };
    State::new_1d(zt, vt, VelocityRole::ShearMeanV)
}

/// `E0 = (S0 U, U) + mu (S1 U_x, U_x)`
pub fn sym_energy(s: &State, p: &Params, ops: &SymBoussinesqOps) -> f64 {
    let (z, v) = (&s.zeta, s.v());
    let (zx, vx) = (dx(z), dx(v));
    ops.s0[(0, 0)] * z.inner(z)
        + ops.s0[(1, 1)] * v.inner(v)
        + p.mu * (ops.s1[(0, 0)] * zx.inner(&zx) + ops.s1[(1, 1)] * vx.inner(&vx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    fn state(g: Grid, z: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64) -> State {
        State::new_1d(
            Field::from_fn(g, |x, _| z(x)),
            Field::from_fn(g, |x, _| v(x)),
            VelocityRole::ShearMeanV,
        )
        .unwrap()
    }

    #[test]
    fn critical_ratio_makes_rhs_linear() {
        let g = Grid::periodic_1d(64).unwrap();
        let (gamma, delta) = (0.49, 0.7);
        let ops = BoussinesqOps::base(gamma, delta, 0.0).unwrap();
        let p = Params::new(gamma, 0.5, 0.0, 0.05, delta);
        let a = state(g, |x| 0.3 * x.sin(), |x| 0.2 * (2.0 * x).cos());
        let b = state(g, |x| 0.1 * (3.0 * x).cos(), |x| -0.4 * x.sin());
        let ra = boussinesq_rhs(&a, &p, &ops).unwrap();
        let rb = boussinesq_rhs(&b, &p, &ops).unwrap();
        let rab = boussinesq_rhs(&a.axpy(2.0, &b), &p, &ops).unwrap();
        let lin = ra.axpy(2.0, &rb);
        assert!(rab.axpy(-1.0, &lin).sup_norm() < 1e-13);
    }

    #[test]
    fn mass_indefinite_is_reported() {
        let g = Grid::periodic_1d(64).unwrap();
        let family = BoussinesqFamily {
            theta1: 0.0,
            theta2: 1.0,
            lambda1: 3.0,
            lambda2: 0.0,
        };
        let ops = BoussinesqOps::new(0.5, 1.0, 0.0, family).unwrap();
        let p = Params::new(0.5, 0.1, 0.0, 0.1, 1.0);
        let s = state(g, |x| 0.1 * x.sin(), |_| 0.0);
        assert!(matches!(boussinesq_rhs(&s, &p, &ops), Err(Error::MassIndefinite { .. })));
    }

    #[test]
    fn family_variable_round_trip() {
        let g = Grid::periodic_1d(32).unwrap();
        let p = Params::new(0.5, 0.1, 0.0, 0.1, 1.0);
        let f = BoussinesqFamily {
            theta1: 0.3,
            theta2: 0.7,
            ..Default::default()
        };
        let v = Field::from_fn(g, |x, _| (x.sin()).exp());
        let back = boussinesq_to_primitive(&boussinesq_from_primitive(&v, &p, &f), &p, &f);
        assert!((&back - &v).sup_norm() < 1e-13);
    }

    #[test]
    fn symmetric_system_solves_its_mass_equation() {
        let g = Grid::periodic_1d(64).unwrap();
        let p = Params::new(0.3, 0.2, 0.0, 0.05, 1.5).with_bo_inv(0.5);
        let ops = SymBoussinesqOps::new(p.gamma, p.delta, p.bo_inv).unwrap();
        let s = state(g, |x| 0.5 * x.sin(), |x| 0.4 * x.cos());
        let r = sym_boussinesq_rhs(&s, &p, &ops, 1e-13).unwrap();
        // apply the full mass operator to the result and compare with the flux side
        let (z, v) = (&s.zeta, s.v());
        let q = sym_mass_coefficient(z, &p, &ops);
        let lhs_v = (&q * &r.vel[0]).axpy(-p.mu * ops.s1[(1, 1)], &dxx(&r.vel[0]));
        let quad = (z * z).scale(0.5).axpy(0.5 / (ops.gd * ops.gd), &(v * v));
        let rhs_v = dx(z)
            .scale(-1.0)
            .axpy(-p.epsilon * ops.sigma_nl, &dx(&dealias(&quad)))
            .axpy(p.mu * ops.sigma1[(1, 0)], &deriv(z, 0, 3));
        assert!((&lhs_v - &rhs_v).sup_norm() < 1e-11);
        assert!(r.zeta.mean().abs() < 1e-14);
    }

    #[test]
    fn energy_of_rest_is_zero() {
        let g = Grid::periodic_1d(16).unwrap();
        let p = Params::default();
        let ops = SymBoussinesqOps::new(p.gamma, p.delta, 0.0).unwrap();
        assert_eq!(sym_energy(&State::zeros(g, super::super::ModelId::SymBouss1d), &p, &ops), 0.0);
    }
}
