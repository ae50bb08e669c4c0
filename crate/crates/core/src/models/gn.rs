use crate::error::{Error, Result};
use crate::operators::{qbar, r0_with, rbar, t_operator, DepthFields};
use crate::params::{nu_gn, Params};
use crate::solvers::SolveStats;
use crate::spectral::{dealias, dx, helmholtz_inverse_odd, Field, VecField};

use super::sw::{curvature_1d, mass_tendency_1d, sw_momentum_1d};
use super::{State, Tolerances, VelocityRole};

/// `T[h2, beta b](h1 v / H) - gamma T[h1, 0](-h2 v / H)`
fn t_combination(d: &DepthFields, beta_b: Option<&Field>, gamma: f64, v: &Field) -> Result<Field> {
    let u2 = (&d.h1 * v) / &d.total;
    let u1 = -&((&d.h2 * v) / &d.total);
    let t2 = t_operator(&d.h2, beta_b, &VecField::from_scalar(u2))?;
    let t1 = t_operator(&d.h1, None, &VecField::from_scalar(u1))?;
    Ok(t2.comp(0).axpy(-gamma, t1.comp(0)))
}

/// Linear operator `v -> w` at fixed depths.
trait MomentumMap {
    fn apply(&self, v: &Field) -> Result<Field>;
}

struct Topographic<'a> {
    d: &'a DepthFields,
    beta_b: Option<&'a Field>,
    p: &'a Params,
}

impl MomentumMap for Topographic<'_> {
    fn apply(&self, v: &Field) -> Result<Field> {
        Ok(v.axpy(self.p.mu, &t_combination(self.d, self.beta_b, self.p.gamma, v)?))
    }
}

struct Flat<'a> {
    d: &'a DepthFields,
    p: &'a Params,
}

impl MomentumMap for Flat<'_> {
    fn apply(&self, v: &Field) -> Result<Field> {
        Ok(v.axpy(self.p.mu, &qbar(&self.d.h1, &self.d.h2, self.p.gamma, v)))
    }
}

/// Preconditioned fixed point for `A v = w`, preconditioned by the flat-state operator.
fn solve_momentum(a: &dyn MomentumMap, w: &Field, p: &Params, tol: f64, max_iter: usize) -> Result<(Field, SolveStats)> {
    let mu_nu = p.mu * nu_gn(p.gamma, p.delta);
    let w_norm = w.l2_norm();
    if w_norm == 0.0 {
        return Ok((
            Field::zeros(*w.grid()),
            SolveStats {
                iterations: 0,
                residual: 0.0,
            },
        ));
    }
    let mut v = helmholtz_inverse_odd(mu_nu, w);
    let mut res = f64::INFINITY;
    for it in 0..=max_iter {
        let r = w - &a.apply(&v)?;
        res = r.l2_norm() / w_norm;
        if !res.is_finite() {
            break;
        }
        if res <= tol {
            return Ok((v, SolveStats { iterations: it, residual: res }));
        }
        v = &v + &helmholtz_inverse_odd(mu_nu, &r);
    }
    Err(Error::IterationLimit {
        solver: "Green-Naghdi momentum inversion",
        iterations: max_iter,
        residual: res,
    })
}

fn scaled_b(b: Option<&Field>, p: &Params) -> Option<Field> {
    b.map(|b| b.scale(p.beta))
}

/// `w = v + mu [T[h2,beta b](h1 v/H) - gamma T[h1,0](-h2 v/H)]`
pub fn gn1d_pack(zeta: &Field, v: &Field, p: &Params, b: Option<&Field>) -> Result<Field> {
    let d = DepthFields::new(zeta, b, p)?;
    let bb = scaled_b(b, p);
    Topographic {
        d: &d,
        beta_b: bb.as_ref(),
        p,
    }
    .apply(v)
}

/// `w = v + mu Qbar[h1,h2] v` (flat bottom).
pub fn gn1d_pack_flat(zeta: &Field, v: &Field, p: &Params) -> Result<Field> {
    let d = DepthFields::new(zeta, None, p)?;
    Flat { d: &d, p }.apply(v)
}

pub fn gn1d_unpack(
    zeta: &Field,
    w: &Field,
    p: &Params,
    b: Option<&Field>,
    tol: &Tolerances,
) -> Result<(Field, SolveStats)> {
    let d = DepthFields::new(zeta, b, p)?;
    let bb = scaled_b(b, p);
    let a = Topographic {
        d: &d,
        beta_b: bb.as_ref(),
        p,
    };
    solve_momentum(&a, w, p, tol.unpack_tol, tol.unpack_max_iter)
}

pub fn gn1d_unpack_flat(zeta: &Field, w: &Field, p: &Params, tol: &Tolerances) -> Result<(Field, SolveStats)> {
    let d = DepthFields::new(zeta, None, p)?;
    solve_momentum(&Flat { d: &d, p }, w, p, tol.unpack_tol, tol.unpack_max_iter)
}

fn assemble(s: &State, d: &DepthFields, v: &Field, nonlinear: Field, p: &Params) -> Result<State> {
    let zt = mass_tendency_1d(d, v);
    let mut wt = sw_momentum_1d(d, &s.zeta, v, p);
    wt = wt.axpy(p.mu * p.epsilon, &dx(&dealias(&nonlinear)));
    if let Some(c) = curvature_1d(&s.zeta, p) {
        wt = &wt + &c;
    }
    State::new_1d(zt, wt, VelocityRole::GnMomentumW)
}

/// Green-Naghdi system with topography, prognostic in `(zeta, w)`.
pub fn gn1d_rhs(s: &State, p: &Params, b: Option<&Field>, tol: &Tolerances) -> Result<State> {
    let d = DepthFields::new(&s.zeta, b, p)?;
    let bb = scaled_b(b, p);
    let a = Topographic {
        d: &d,
        beta_b: bb.as_ref(),
        p,
    };
    let (v, _) = solve_momentum(&a, s.v(), p, tol.unpack_tol, tol.unpack_max_iter)?;
    let r0 = r0_with(&d, bb.as_ref(), &v, p)?;
    assemble(s, &d, &v, r0, p)
}

/// Flat-bottom Green-Naghdi system written with `Qbar` and `Rbar`.
pub fn gn1d_rhs_flat(s: &State, p: &Params, tol: &Tolerances) -> Result<State> {
    let d = DepthFields::new(&s.zeta, None, p)?;
    let (v, _) = solve_momentum(&Flat { d: &d, p }, s.v(), p, tol.unpack_tol, tol.unpack_max_iter)?;
    let r = rbar(&d.h1, &d.h2, p.gamma, &v);
    assemble(s, &d, &v, r, p)
}

/// `(d_t zeta, d_t v)` of the Green-Naghdi system in primitive variables.
///
/// Uses `d_t w = A[zeta] v_t + (D_zeta A . zeta_t) v`; the zeta-derivative of
/// the operator is a fourth-order central difference along `zeta_t`.
pub fn gn1d_tendency(
    zeta: &Field,
    v: &Field,
    p: &Params,
    b: Option<&Field>,
    tol: &Tolerances,
) -> Result<(Field, Field)> {
    let w = gn1d_pack(zeta, v, p, b)?;
    let s = State::new_1d(zeta.clone(), w, VelocityRole::GnMomentumW)?;
    let r = gn1d_rhs(&s, p, b, tol)?;
    let (zt, wt) = (r.zeta, r.vel.into_iter().next().expect("one velocity component"));
    let scale = p.epsilon * zt.sup_norm();
    let corrected = if scale > 0.0 && p.mu > 0.0 {
        let h = 1e-3 / scale;
        let at = |c: f64| gn1d_pack(&zeta.axpy(c * h, &zt), v, p, b);
        let da = (&(&at(-2.0)? - &at(2.0)?) + &(&at(1.0)? - &at(-1.0)?).scale(8.0)).scale(1.0 / (12.0 * h));
        &wt - &da
    } else {
        wt
    };
    let (vt, _) = gn1d_unpack(zeta, &corrected, p, b, tol)?;
    Ok((zt, vt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_smooth(g: Grid, rng: &mut ChaCha8Rng, amp: f64) -> Field {
        let coeffs: Vec<(f64, f64)> = (1..=4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.3))).collect();
        Field::from_fn(g, |x, _| {
            amp * coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, ph))| a * ((k + 1) as f64 * x + ph).sin() / (k + 1) as f64)
                .sum::<f64>()
        })
    }

    #[test]
    fn pack_unpack_round_trip() {
        let g = Grid::periodic_1d(64).unwrap();
        let p = Params::new(0.6, 0.3, 0.4, 0.05, 1.3);
        let zeta = Field::from_fn(g, |x, _| 0.4 * x.sin());
        let b = Field::from_fn(g, |x, _| 0.3 * (2.0 * x).cos());
        let v = Field::from_fn(g, |x, _| 0.2 * x.cos() + 0.1);
        let w = gn1d_pack(&zeta, &v, &p, Some(&b)).unwrap();
        let (back, stats) = gn1d_unpack(&zeta, &w, &p, Some(&b), &Tolerances::default()).unwrap();
        assert!(stats.iterations > 0);
        assert!((&back - &v).sup_norm() < 1e-10);
    }

    #[test]
    fn flat_bottom_paths_agree() {
        let g = Grid::periodic_1d(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tol = Tolerances::tight();
        for _ in 0..5 {
            let p = Params::new(rng.gen_range(0.0..0.95), 0.4, 0.0, rng.gen_range(0.01..0.1), rng.gen_range(0.5..2.0));
            let zeta = random_smooth(g, &mut rng, 0.5);
            let w = random_smooth(g, &mut rng, 0.5);
            let s = State::new_1d(zeta, w, VelocityRole::GnMomentumW).unwrap();
            let a = gn1d_rhs(&s, &p, None, &tol).unwrap();
            let b = gn1d_rhs_flat(&s, &p, &tol).unwrap();
            assert!((&a.zeta - &b.zeta).sup_norm() < 1e-10);
            assert!((&a.vel[0] - &b.vel[0]).sup_norm() < 1e-10);
        }
    }

    #[test]
    fn fluxes_have_zero_mean() {
        let g = Grid::periodic_1d(64).unwrap();
        let p = Params::new(0.5, 0.3, 0.5, 0.05, 1.0).with_bond_inv(0.02);
        let b = Field::from_fn(g, |x, _| 0.5 * (x.cos() - (2.0 * x).sin()));
        let s = State::new_1d(
            Field::from_fn(g, |x, _| 0.3 * x.sin() + 0.1 * (3.0 * x).cos()),
            Field::from_fn(g, |x, _| 0.4 * x.cos() + 0.2),
            VelocityRole::GnMomentumW,
        )
        .unwrap();
        let r = gn1d_rhs(&s, &p, Some(&b), &Tolerances::default()).unwrap();
        assert!(r.zeta.mean().abs() < 1e-13);
        assert!(r.vel[0].mean().abs() < 1e-13);
    }

    #[test]
    fn tendency_matches_time_derivative_of_pack() {
        // d/dt pack(zeta, v) along (zeta_t, v_t) must equal w_t
        let g = Grid::periodic_1d(64).unwrap();
        let p = Params::new(0.4, 0.3, 0.0, 0.05, 1.2);
        let zeta = Field::from_fn(g, |x, _| 0.3 * x.sin());
        let v = Field::from_fn(g, |x, _| 0.3 * x.cos());
        let tol = Tolerances::tight();
        let (zt, vt) = gn1d_tendency(&zeta, &v, &p, None, &tol).unwrap();
        let w = gn1d_pack(&zeta, &v, &p, None).unwrap();
        let r = gn1d_rhs(&State::new_1d(zeta.clone(), w, VelocityRole::GnMomentumW).unwrap(), &p, None, &tol).unwrap();
        let h = 1e-4;
        let fwd = gn1d_pack(&zeta.axpy(h, &zt), &v.axpy(h, &vt), &p, None).unwrap();
        let bwd = gn1d_pack(&zeta.axpy(-h, &zt), &v.axpy(-h, &vt), &p, None).unwrap();
        let dwdt = (&fwd - &bwd).scale(0.5 / h);
        assert!((&dwdt - &r.vel[0]).sup_norm() < 1e-7, "{}", (&dwdt - &r.vel[0]).sup_norm());
    }
}
