//! Dispersion relations, order fits and the convergence experiments.

use nalgebra::Matrix4;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{build_unidirectional_ic, decoupled_evolve, underline_v, ModelId, ModelSpec, State, VelocityRole};
use crate::operators::DepthFields;
use crate::params::{nu_gn, BoussinesqOps, ClCoeffs, ClVariant, Params};
use crate::spectral::{Field, Grid};
use crate::timeloop::{integrate, x_s_norm, StepperConfig, Trajectory};

/// Phase speed of the linearization about rest.
///
/// Decoupled scalar equations report the speed in their moving frame (signed).
pub fn model_dispersion(m: &ModelSpec, k: f64) -> Result<f64> {
    let p = m.effective_params();
    let k2 = k * k;
    let mu = p.mu;
    let c2 = match m.id {
        ModelId::Sw1d | ModelId::Sw2d => 1.0 + p.bond_inv * k2,
        ModelId::Gn1d | ModelId::Gn2d => (1.0 + p.bond_inv * k2) / (1.0 + mu * nu_gn(p.gamma, p.delta) * k2),
        ModelId::Chgn1d => 1.0 / (1.0 + mu * nu_gn(p.gamma, p.delta) * k2),
        ModelId::Bouss1d => {
            let ops = BoussinesqOps::new(p.gamma, p.delta, p.bo_inv, m.family)?;
            let b = ops.a0 - ops.a2 * (mu * k2);
            let d0 = 1.0 + mu * ops.a1[(0, 0)] * k2;
            let d1 = 1.0 + mu * ops.a1[(1, 1)] * k2;
            b[(0, 1)] * b[(1, 0)] / (d0 * d1)
        }
        ModelId::SymBouss1d => {
            let nu = nu_gn(p.gamma, p.delta);
            (1.0 + mu * k2 * (1.0 + p.bo_inv)) / (1.0 + mu * k2 * (1.0 + nu))
        }
        ModelId::ClScalar => {
            let c = m.cl.ok_or_else(|| Error::InvalidParameter {
                name: "cl",
                reason: "CL_SCALAR needs a coefficient set".into(),
            })?;
            let denom = 1.0 + mu * c.nu_t * k2;
            return Ok(match c.variant {
                ClVariant::Unidirectional => (1.0 - mu * c.nu_x * k2) / denom,
                ClVariant::Decoupled => -m.cl_sign * mu * c.nu_x * k2 / denom,
            });
        }
    };
    if c2 < 0.0 {
        return Err(Error::Inadmissible(format!("linearized system is not hyperbolic at k = {k} (c^2 = {c2})")));
    }
    Ok(c2.sqrt())
}

/// Linearized two-layer rigid-lid phase speed of the full Euler system:
/// `c^2 = (1 + Bo^-1 k^2)(gamma + delta) / (a (gamma coth a + coth(a/delta)))`, `a = sqrt(mu) k`.
pub fn full_euler_dispersion(k: f64, p: &Params) -> f64 {
    let a = p.mu.sqrt() * k.abs();
    let gd = p.gd();
    let tension = 1.0 + p.bond_inv * k * k;
    if a < 1e-6 {
        // a coth(a) = 1 + a^2/3 - a^4/45
        let ac = |x: f64| 1.0 + x * x / 3.0 - x.powi(4) / 45.0;
        let denom = p.gamma * ac(a) + p.delta * ac(a / p.delta);
        return (tension * gd / denom).sqrt();
    }
    let coth = |x: f64| 1.0 / x.tanh();
    (tension * gd / (a * (p.gamma * coth(a) + coth(a / p.delta)))).sqrt()
}

/// Phase speed from the assembled linearized right-hand side on a `2 pi`
/// periodic grid with `n` points, for integer wavenumber `k`.
pub fn matrix_dispersion(m: &ModelSpec, n: usize, k: usize) -> Result<f64> {
    if m.id.dim() != 1 {
        return Err(Error::Unsupported("the matrix oracle covers one-dimensional models".into()));
    }
    if m.topography.is_some() {
        return Err(Error::Unsupported("the matrix oracle linearizes about a flat rest state".into()));
    }
    let g = Grid::periodic_1d(n)?;
    if 2 * k >= n {
        return Err(Error::InvalidGrid(format!("wavenumber {k} is not resolved by {n} points")));
    }
    let mut lin = m.clone();
    lin.params.epsilon = 0.0;
    let kf = k as f64;
    let cos = Field::from_fn(g, |x, _| (kf * x).cos());
    let sin = Field::from_fn(g, |x, _| (kf * x).sin());
    let norm = g.length(0) / 2.0;
    if m.id == ModelId::ClScalar {
        let r = lin.rhs(&State::scalar(cos))?;
        return Ok(r.zeta.inner(&sin) / norm / kf);
    }
    let zero = Field::zeros(g);
    let basis = [
        (cos.clone(), zero.clone()),
        (sin.clone(), zero.clone()),
        (zero.clone(), cos.clone()),
        (zero, sin.clone()),
    ];
    let mut a = Matrix4::<f64>::zeros();
    for (j, (z, v)) in basis.iter().enumerate() {
        let s = State::new_1d(z.clone(), v.clone(), m.id.role())?;
        let r = lin.rhs(&s)?;
        let rv = &r.vel[0];
        a[(0, j)] = r.zeta.inner(&cos) / norm;
        a[(1, j)] = r.zeta.inner(&sin) / norm;
        a[(2, j)] = rv.inner(&cos) / norm;
        a[(3, j)] = rv.inner(&sin) / norm;
    }
    let omega = a.complex_eigenvalues().iter().map(|l| l.im.abs()).fold(0.0, f64::max);
    Ok(omega / kf)
}

/// Outcome of comparing a fitted slope with its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    /// The points do not lie on a line (max deviation above 0.2 decades).
    Inconclusive,
    /// Residuals at rounding level; no slope can be measured.
    Degenerate,
}

/// Least-squares line through `(log10 x, log10 y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderFit {
    pub abscissae: Vec<f64>,
    pub residuals: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest `|log10 y - line|`.
    pub max_deviation: f64,
    pub degenerate: bool,
}

/// Residuals below this are treated as rounding noise.
pub const DEGENERATE_LEVEL: f64 = 1e-12;
pub const MAX_FIT_DEVIATION: f64 = 0.2;

impl OrderFit {
    pub fn new(abscissae: Vec<f64>, residuals: Vec<f64>) -> Result<Self> {
        if abscissae.len() != residuals.len() || abscissae.len() < 3 {
            return Err(Error::InvalidParameter {
                name: "abscissae",
                reason: "an order fit needs at least three (x, residual) pairs".into(),
            });
        }
        if abscissae.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "abscissae",
                reason: "abscissae must be positive".into(),
            });
        }
        let degenerate = residuals.iter().any(|&r| !(r > DEGENERATE_LEVEL));
        if degenerate {
            return Ok(Self {
                abscissae,
                residuals,
                slope: f64::NAN,
                intercept: f64::NAN,
                max_deviation: f64::NAN,
                degenerate,
            });
        }
        let xs: Vec<f64> = abscissae.iter().map(|x| x.log10()).collect();
        let ys: Vec<f64> = residuals.iter().map(|y| y.log10()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let max_deviation = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).abs())
            .fold(0.0, f64::max);
        Ok(Self {
            abscissae,
            residuals,
            slope,
            intercept,
            max_deviation,
            degenerate,
        })
    }

    pub fn verdict(&self, target: f64, band: f64) -> Verdict {
        if self.degenerate {
            Verdict::Degenerate
        } else if self.max_deviation > MAX_FIT_DEVIATION {
            Verdict::Inconclusive
        } else if (self.slope - target).abs() <= band {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

pub const ORDER_MUS: [f64; 5] = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2];

/// The fixed smooth reference state `(0.5 sin x, 0.3 cos x)`.
pub fn reference_state(g: Grid) -> (Field, Field) {
    (
        Field::from_fn(g, |x, _| 0.5 * x.sin()),
        Field::from_fn(g, |x, _| 0.3 * x.cos()),
    )
}

/// Regime path `mu -> epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Path {
    Fixed(f64),
    SqrtMu,
    Mu,
}

impl Path {
    pub fn epsilon(&self, mu: f64) -> f64 {
        match *self {
            Path::Fixed(e) => e,
            Path::SqrtMu => mu.sqrt(),
            Path::Mu => mu,
        }
    }
}

/// `|(zeta_t, v_t)_A - (zeta_t, v_t)_B|` in `H^s` on the reference state, along `path`.
pub fn residual_order(a: &ModelSpec, b: &ModelSpec, g: Grid, path: Path, mus: &[f64], s_index: f64) -> Result<OrderFit> {
    let (zeta, v) = reference_state(g);
    let mut res = Vec::with_capacity(mus.len());
    for &mu in mus {
        let at = |m: &ModelSpec| {
            let mut m = m.clone();
            m.params = m.params.with_mu(mu).with_epsilon(path.epsilon(mu));
            m.validate()?;
            m.tendency(&zeta, &v)
        };
        let wrap = |e| Error::AtSweepPoint { mu, source: Box::new(e) };
        let (za, va) = at(a).map_err(wrap)?;
        let (zb, vb) = at(b).map_err(wrap)?;
        let dz = crate::spectral::sobolev_norm(&(&za - &zb), s_index);
        let dv = crate::spectral::sobolev_norm(&(&va - &vb), s_index);
        res.push((dz * dz + dv * dv).sqrt());
    }
    OrderFit::new(mus.to_vec(), res)
}

/// `|c_A(k)^2 - c_B(k)^2|` with `B` the full Euler system, along a sweep in `mu`.
pub fn dispersion_order(m: &ModelSpec, k: f64, mus: &[f64]) -> Result<OrderFit> {
    let mut res = Vec::with_capacity(mus.len());
    for &mu in mus {
        let mut mm = m.clone();
        mm.params = mm.params.with_mu(mu);
        let c = model_dispersion(&mm, k)?;
        let e = full_euler_dispersion(k, &mm.effective_params());
        res.push((c * c - e * e).abs());
    }
    OrderFit::new(mus.to_vec(), res)
}

/// `X^s` distance between two `(zeta, v)` trajectories at each shared time.
pub fn compare_trajectories(a: &Trajectory, b: &Trajectory, p: &Params, s_index: f64) -> Result<Vec<(f64, f64)>> {
    if a.times.len() != b.times.len() {
        return Err(Error::InvalidParameter {
            name: "trajectories",
            reason: "output strides differ".into(),
        });
    }
    a.times
        .iter()
        .zip(&b.times)
        .zip(a.states.iter().zip(&b.states))
        .map(|((&ta, &tb), (sa, sb))| {
            if (ta - tb).abs() > 1e-12 * ta.abs().max(1.0) {
                return Err(Error::InvalidParameter {
                    name: "trajectories",
                    reason: format!("timestamps differ ({ta} vs {tb})"),
                });
            }
            if sa.grid() != sb.grid() {
                return Err(Error::GridMismatch);
            }
            Ok((ta, state_distance(sa, sb, p, s_index)?))
        })
        .collect()
}

/// `X^s` norm of the difference of two `(zeta, v)` states.
pub fn state_distance(a: &State, b: &State, p: &Params, s_index: f64) -> Result<f64> {
    if a.role != VelocityRole::ShearMeanV || b.role != VelocityRole::ShearMeanV {
        return Err(Error::WrongState {
            model: "comparison",
            expected: "(zeta, v) states",
        });
    }
    x_s_norm(&a.axpy(-1.0, b), p, s_index)
}

/// Terminal `X^0` error of the unidirectional approximation against CHGN1D,
/// `epsilon = sqrt(mu)`, from prepared data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnidirectionalSetup {
    pub gamma: f64,
    pub delta: f64,
    pub theta: f64,
    pub lambda: f64,
    pub n: usize,
    pub t_end: f64,
    pub dt: f64,
}

impl Default for UnidirectionalSetup {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            delta: 1.2,
            theta: 1.0,
            lambda: 0.0,
            n: 64,
            t_end: 1.0,
            dt: 0.01,
        }
    }
}

pub fn unidirectional_error(setup: &UnidirectionalSetup, mu: f64, zeta0: impl Fn(f64) -> f64) -> Result<f64> {
    let g = Grid::periodic_1d(setup.n)?;
    let p = Params::new(setup.gamma, mu.sqrt(), 0.0, mu, setup.delta);
    let evolve = ClCoeffs::new(ClVariant::Unidirectional, p.gamma, p.delta, setup.theta, setup.lambda)?;
    let prep = ClCoeffs::new(ClVariant::Unidirectional, p.gamma, p.delta, 0.0, 0.0)?;
    let z0 = Field::from_fn(g, |x, _| zeta0(x));
    let s0 = build_unidirectional_ic(&z0, &p, &prep)?;
    let cfg = StepperConfig::new(setup.dt, setup.t_end);

    let chgn = ModelSpec::new(ModelId::Chgn1d, p).with_tolerances(crate::models::Tolerances::tight());
    let reference = integrate(&chgn, s0, &cfg)?;

    let cl = ModelSpec::new(ModelId::ClScalar, p).with_cl(evolve, 1.0);
    let zu = integrate(&cl, State::scalar(z0), &cfg)?.final_state().zeta.clone();
    let d = DepthFields::new(&zu, None, &p)?;
    let weight = d.total.zip_map(&(&d.h1 * &d.h2), |t, hh| t / hh);
    let vu = &weight * &underline_v(&zu, &p)?;
    let approx = State::new_1d(zu, vu, VelocityRole::ShearMeanV)?;
    state_distance(reference.final_state(), &approx, &p, 0.0)
}

/// Terminal `X^0` error of the decoupled approximation against SYMBOUSS1D, `epsilon = mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoupledSetup {
    pub gamma: f64,
    pub delta: f64,
    pub theta: f64,
    pub lambda: f64,
    pub n: usize,
    pub t_end: f64,
    pub dt: f64,
}

impl Default for DecoupledSetup {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            delta: 1.2,
            theta: 1.0,
            lambda: 0.0,
            n: 64,
            t_end: 1.0,
            dt: 0.01,
        }
    }
}

impl DecoupledSetup {
    /// `max(eps |delta^2 - gamma|, mu)`
    pub fn eps0(&self, eps: f64, mu: f64) -> f64 {
        (eps * (self.delta * self.delta - self.gamma).abs()).max(mu)
    }
}

pub fn decoupled_error(
    setup: &DecoupledSetup,
    eps_mu: f64,
    zeta0: impl Fn(f64) -> f64,
    v0: impl Fn(f64) -> f64,
) -> Result<f64> {
    let g = Grid::periodic_1d(setup.n)?;
    let p = Params::new(setup.gamma, eps_mu, 0.0, eps_mu, setup.delta);
    let c = ClCoeffs::new(ClVariant::Decoupled, p.gamma, p.delta, setup.theta, setup.lambda)?;
    let z0 = Field::from_fn(g, |x, _| zeta0(x));
    let vv = Field::from_fn(g, |x, _| v0(x));
    let sym = ModelSpec::new(ModelId::SymBouss1d, p).with_tolerances(crate::models::Tolerances::tight());
    let cfg = StepperConfig::new(setup.dt, setup.t_end);
    let reference = integrate(&sym, State::new_1d(z0.clone(), vv.clone(), VelocityRole::ShearMeanV)?, &cfg)?;
    let approx = decoupled_evolve(&z0, &vv, &p, &c, setup.t_end, setup.dt)?;
    state_distance(reference.final_state(), &approx, &p, 0.0)
}

/// Observed order `log2(|u_h - u_{h/2}| / |u_{h/2} - u_{h/4}|)` of the time integrator.
pub fn richardson_order(m: &ModelSpec, s0: &State, t_end: f64, dt: f64) -> Result<RichardsonResult> {
    let run = |h: f64| -> Result<State> { Ok(integrate(m, s0.clone(), &StepperConfig::new(h, t_end))?.final_state().clone()) };
    let u1 = run(dt)?;
    let u2 = run(dt / 2.0)?;
    let u4 = run(dt / 4.0)?;
    let e1 = u1.axpy(-1.0, &u2).l2_norm();
    let e2 = u2.axpy(-1.0, &u4).l2_norm();
    Ok(RichardsonResult {
        coarse_diff: e1,
        fine_diff: e2,
        ratio: e1 / e2,
        order: (e1 / e2).log2(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RichardsonResult {
    pub coarse_diff: f64,
    pub fine_diff: f64,
    pub ratio: f64,
    pub order: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_waves_move_at_unit_speed() {
        let p = Params::new(0.4, 0.1, 0.0, 1e-30, 1.3);
        for id in [ModelId::Sw1d, ModelId::Gn1d, ModelId::Chgn1d, ModelId::Bouss1d, ModelId::SymBouss1d] {
            let c = model_dispersion(&ModelSpec::new(id, p), 3.0).unwrap();
            assert!((c - 1.0).abs() < 1e-12, "{id}");
        }
        assert!((full_euler_dispersion(3.0, &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boussinesq_hand_value() {
        // mu k^2 = 0.3, gamma = 0, delta = 1: nu = 1/3
        let p = Params::new(0.0, 0.1, 0.0, 0.3, 1.0);
        let c = model_dispersion(&ModelSpec::new(ModelId::Bouss1d, p), 1.0).unwrap();
        assert!((c * c - 1.0 / 1.1).abs() < 1e-14);
    }

    #[test]
    fn full_euler_one_layer_limit() {
        // gamma = 0: c^2 = delta tanh(a/delta) / a
        let p = Params::new(0.0, 0.1, 0.0, 0.2, 1.7);
        for k in [0.5, 1.0, 3.0] {
            let a = p.mu.sqrt() * k;
            let want = p.delta * (a / p.delta).tanh() / a;
            assert!((full_euler_dispersion(k, &p).powi(2) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn full_euler_small_argument_branch_is_continuous() {
        let p = Params::new(0.3, 0.1, 0.0, 1.0, 0.8);
        let below = full_euler_dispersion(0.999e-6, &p);
        let above = full_euler_dispersion(1.001e-6, &p);
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_power_law() {
        let xs = vec![1e-4, 1e-3, 1e-2, 1e-1];
        let fit = OrderFit::new(xs.clone(), xs.iter().map(|x| 3.0 * x * x).collect()).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit.max_deviation < 1e-12);
        assert_eq!(fit.verdict(2.0, 0.1), Verdict::Pass);
        let zero = OrderFit::new(xs, vec![0.0, 1e-16, 0.0, 1e-15]).unwrap();
        assert_eq!(zero.verdict(2.0, 0.1), Verdict::Degenerate);
    }

    #[test]
    fn identical_models_are_degenerate() {
        let g = Grid::periodic_1d(64).unwrap();
        let m = ModelSpec::new(ModelId::Sw1d, Params::default());
        let fit = residual_order(&m, &m, g, Path::Fixed(0.1), &ORDER_MUS, 0.0).unwrap();
        assert!(fit.degenerate);
    }

    #[test]
    fn matrix_oracle_matches_boussinesq_example() {
        let p = Params::new(0.5, 0.0, 0.0, 0.1, 1.0);
        let c = matrix_dispersion(&ModelSpec::new(ModelId::Bouss1d, p), 16, 1).unwrap();
        assert!((c * c - 1.0 / (1.0 + 0.1 / 3.0)).abs() < 1e-12);
    }
}
