use crate::error::{Error, Result};
use crate::operators::DepthFields;
use crate::params::{ClCoeffs, ClVariant, Params};
use crate::spectral::{apply_radial, dealias, deriv, dx, dxx, shift_x, Field};
use crate::timeloop::{integrate, StepperConfig};

use super::{ModelId, ModelSpec, State, VelocityRole};

/// Constantin-Lannes scalar equation. `sign` selects the decoupled wave
/// direction and is ignored by the unidirectional variant.
pub fn cl_rhs(u: &Field, p: &Params, c: &ClCoeffs, sign: f64) -> Result<Field> {
    c.require_admissible()?;
    let e = p.epsilon;
    let ux = dx(u);
    let u2 = u * u;
    let mut nl = dx(&dealias(&u2)).scale(0.5 * e * c.alpha1);
    if e != 0.0 {
        let u3 = &u2 * u;
        nl = nl
            .axpy(e * e * c.alpha2 / 3.0, &dx(&dealias(&u3)))
            .axpy(e.powi(3) * c.alpha3 / 4.0, &dx(&dealias(&(&u3 * u))));
        let inner = (u * &dxx(u)).scale(c.kappa1).axpy(c.kappa2, &(&ux * &ux));
        nl = nl.axpy(p.mu * e, &dx(&dealias(&inner)));
    }
    nl = nl.axpy(p.mu * c.nu_x, &deriv(u, 0, 3));
    let forcing = match c.variant {
        ClVariant::Unidirectional => -&(&ux + &nl),
        ClVariant::Decoupled => nl.scale(-sign),
    };
    Ok(apply_radial(&forcing, |k2| 1.0 / (1.0 + p.mu * c.nu_t * k2)))
}

/// `zeta + eps a1 zeta^2/2 + eps^2 a2 zeta^3/3 + eps^3 a3 zeta^4/4 + mu nu zeta_xx + mu eps (k1 zeta zeta_xx + k2 zeta_x^2)`
/// with the `theta = lambda = 0` constants.
pub fn underline_v(zeta: &Field, p: &Params) -> Result<Field> {
    let c = ClCoeffs::new(ClVariant::Unidirectional, p.gamma, p.delta, 0.0, 0.0)?;
    let e = p.epsilon;
    let zx = dx(zeta);
    let zxx = dxx(zeta);
    let poly = zeta.map(|z| {
        z + e * c.alpha1 * z * z / 2.0 + e * e * c.alpha2 * z.powi(3) / 3.0 + e.powi(3) * c.alpha3 * z.powi(4) / 4.0
    });
    let inner = (zeta * &zxx).scale(c.kappa1).axpy(c.kappa2, &(&zx * &zx));
    Ok(poly.axpy(p.mu * c.nu_x, &zxx).axpy(p.mu * e, &inner))
}

/// Initial data `(zeta0, v0)` prepared for the unidirectional approximation.
pub fn build_unidirectional_ic(zeta0: &Field, p: &Params, c: &ClCoeffs) -> Result<State> {
    if c.variant != ClVariant::Unidirectional {
        return Err(Error::InvalidParameter {
            name: "cl",
            reason: "the prepared initial data needs the unidirectional coefficient set".into(),
        });
    }
    let d = DepthFields::new(zeta0, None, p)?;
    let weight = d.total.zip_map(&(&d.h1 * &d.h2), |t, hh| t / hh);
    let v0 = &weight * &underline_v(zeta0, p)?;
    State::new_1d(zeta0.clone(), v0, VelocityRole::ShearMeanV)
}

/// Symbol of `1 + sign mu lambda d_xx`.
fn lambda_symbol(p: &Params, lambda: f64, sign: f64) -> impl Fn(f64) -> f64 {
    let a = p.mu * lambda * sign;
    move |k2| 1.0 - a * k2
}

/// Decoupled approximation: two counter-propagating scalar waves recombined
/// at time `t_end`.
pub fn decoupled_evolve(zeta0: &Field, v0: &Field, p: &Params, c: &ClCoeffs, t_end: f64, dt: f64) -> Result<State> {
    if c.variant != ClVariant::Decoupled {
        return Err(Error::InvalidParameter {
            name: "cl",
            reason: "decoupled evolution needs the decoupled coefficient set".into(),
        });
    }
    c.require_admissible()?;
    let g = *zeta0.grid();
    let k2max = {
        let k = g.k_even(0, g.n(0) / 2);
        k * k
    };
    let gd = p.gd();
    let mut waves = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        let sym = lambda_symbol(p, c.lambda, sign);
        if sym(k2max).min(sym(0.0)) <= 0.0 {
            return Err(Error::Inadmissible(format!(
                "1 {} mu lambda d_xx is not invertible on the grid (lambda = {})",
                if sign > 0.0 { "+" } else { "-" },
                c.lambda
            )));
        }
        let half = zeta0.scale(gd).axpy(sign, v0).scale(0.5 / gd);
        let start = apply_radial(&half, &sym);
        let spec = ModelSpec::new(ModelId::ClScalar, *p).with_cl(*c, sign);
        let cfg = StepperConfig::new(dt, t_end);
        let traj = integrate(&spec, State::scalar(start), &cfg)?;
        let end = traj.final_state().zeta.clone();
        waves.push(apply_radial(&end, |k2| 1.0 / sym(k2)));
    }
    let plus = shift_x(&waves[0], t_end);
    let minus = shift_x(&waves[1], -t_end);
    State::new_1d(&plus + &minus, (&plus - &minus).scale(gd), VelocityRole::ShearMeanV)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    #[test]
    fn linear_phase_speed() {
        let g = Grid::periodic_1d(32).unwrap();
        let p = Params::new(0.5, 0.0, 0.0, 0.05, 1.0);
        let c = ClCoeffs::new(ClVariant::Unidirectional, 0.5, 1.0, 0.3, 0.2).unwrap();
        let k = 2.0;
        let u = Field::from_fn(g, |x, _| (k * x).cos());
        let ut = cl_rhs(&u, &p, &c, 1.0).unwrap();
        // u_t = c k sin(kx) for u = cos(kx - c k t)
        let speed = (1.0 - p.mu * c.nu_x * k * k) / (1.0 + p.mu * c.nu_t * k * k);
        let want = Field::from_fn(g, |x, _| speed * k * (k * x).sin());
        assert!((&ut - &want).sup_norm() < 1e-12);
    }

    #[test]
    fn ic_reduces_at_zero_amplitude_parameters() {
        let g = Grid::periodic_1d(32).unwrap();
        let (gamma, delta) = (0.4, 1.3);
        let p = Params::new(gamma, 0.0, 0.0, 0.0, delta);
        let c = ClCoeffs::new(ClVariant::Unidirectional, gamma, delta, 0.0, 0.0).unwrap();
        let zeta = Field::from_fn(g, |x, _| 0.2 * x.sin() + 0.1 * (2.0 * x).cos());
        let s = build_unidirectional_ic(&zeta, &p, &c).unwrap();
        assert!((&s.vel[0] - &zeta.scale(gamma + delta)).sup_norm() < 1e-14);
        let zero = build_unidirectional_ic(&Field::zeros(g), &p, &c).unwrap();
        assert_eq!(zero.vel[0].sup_norm(), 0.0);
    }

    #[test]
    fn decoupled_variant_rejected_for_ic() {
        let g = Grid::periodic_1d(16).unwrap();
        let c = ClCoeffs::new(ClVariant::Decoupled, 0.5, 1.0, 1.0, 0.0).unwrap();
        assert!(build_unidirectional_ic(&Field::zeros(g), &Params::default(), &c).is_err());
    }

    #[test]
    fn right_moving_data_keeps_left_wave_at_zero() {
        let g = Grid::periodic_1d(64).unwrap();
        let p = Params::new(0.5, 0.05, 0.0, 0.05, 1.0);
        let c = ClCoeffs::new(ClVariant::Decoupled, 0.5, 1.0, 1.0, 0.0).unwrap();
        let zeta0 = Field::from_fn(g, |x, _| 0.3 * x.sin());
        let v0 = zeta0.scale(p.gd());
        // the left wave starts at exactly zero
        assert_eq!(zeta0.scale(p.gd()).axpy(-1.0, &v0).sup_norm(), 0.0);
        let s = decoupled_evolve(&zeta0, &v0, &p, &c, 0.5, 0.01).unwrap();
        // with v_- = 0 the output satisfies v = (gamma + delta) zeta
        assert!((&s.vel[0] - &s.zeta.scale(p.gd())).sup_norm() < 1e-12);
    }
}
