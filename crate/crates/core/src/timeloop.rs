//! Classical RK4 time stepping with admissibility and conservation monitors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelSpec, State, VelocityRole};
use crate::params::Params;
use crate::spectral::{dx, sobolev_norm, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Scheme {
    #[default]
    #[serde(rename = "ERK4")]
    Erk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Monitors and snapshots are kept every `stride` steps (and at the end).
    pub stride: usize,
    pub scheme: Scheme,
}

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            stride: usize::MAX,
            scheme: Scheme::Erk4,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    /// Half the grid spacing along x.
    pub fn default_dt(grid: &Grid) -> f64 {
        0.5 * grid.spacing(0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: "dt must be positive".into(),
            });
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: "t_end must be non-negative".into(),
            });
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter {
                name: "stride",
                reason: "output stride must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Number of steps and the uniform step that lands exactly on `t_end`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

/// Monitor values at one output time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub mean_zeta: f64,
    /// Mean of the first velocity component (`w` for GN1D).
    pub mean_vel: Option<f64>,
    pub energy: Option<f64>,
    pub min_depth: Option<f64>,
    /// Smallest named margin.
    pub margin: Option<(&'static str, f64)>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("a trajectory holds at least its initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("a trajectory holds at least its initial time")
    }

    /// Largest `|mean(zeta)(t) - mean(zeta)(0)|`.
    pub fn mean_zeta_drift(&self) -> f64 {
        let m0 = self.samples[0].mean_zeta;
        self.samples.iter().map(|s| (s.mean_zeta - m0).abs()).fold(0.0, f64::max)
    }

    pub fn mean_vel_drift(&self) -> Option<f64> {
        let m0 = self.samples[0].mean_vel?;
        Some(
            self.samples
                .iter()
                .filter_map(|s| s.mean_vel)
                .map(|m| (m - m0).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Largest relative energy change.
    pub fn energy_drift(&self) -> Option<f64> {
        let e0 = self.samples[0].energy?;
        Some(
            self.samples
                .iter()
                .filter_map(|s| s.energy)
                .map(|e| ((e - e0) / e0).abs())
                .fold(0.0, f64::max),
        )
    }
}

fn lost(t: f64, e: Error) -> Error {
    if e.is_admissibility() && !matches!(e, Error::AdmissibilityLost { .. }) {
        Error::AdmissibilityLost { t, source: Box::new(e) }
    } else {
        e
    }
}

fn sample(m: &ModelSpec, s: &State, t: f64) -> Result<Sample> {
    let margins = m.margins(s).map_err(|e| lost(t, e))?;
    Ok(Sample {
        t,
        mean_zeta: s.zeta.mean(),
        mean_vel: s.vel.first().map(|v| v.mean()),
        energy: m.energy(s),
        min_depth: margins.min_depth,
        margin: margins.smallest(),
    })
}

/// One classical RK4 step.
pub fn rk4_step(m: &ModelSpec, s: &State, dt: f64) -> Result<State> {
    let k1 = m.rhs(s)?;
    let k2 = m.rhs(&s.axpy(0.5 * dt, &k1))?;
    let k3 = m.rhs(&s.axpy(0.5 * dt, &k2))?;
    let k4 = m.rhs(&s.axpy(dt, &k3))?;
    let incr = k1.axpy(2.0, &k2).axpy(2.0, &k3).axpy(1.0, &k4);
    Ok(s.axpy(dt / 6.0, &incr))
}

/// Integrate `m` from `s0` to `cfg.t_end`.
pub fn integrate(m: &ModelSpec, s0: State, cfg: &StepperConfig) -> Result<Trajectory> {
    m.validate()?;
    cfg.validate()?;
    if !s0.is_finite() {
        return Err(Error::NonFinite { t: 0.0 });
    }
    let (n, dt) = cfg.steps();
    let mut traj = Trajectory {
        times: vec![0.0],
        samples: vec![sample(m, &s0, 0.0)?],
        states: vec![s0.clone()],
    };
    let mut s = s0;
    for step in 1..=n {
        let t_prev = (step - 1) as f64 * dt;
        let t = step as f64 * dt;
        s = rk4_step(m, &s, dt).map_err(|e| lost(t_prev, e))?;
        if !s.is_finite() {
            return Err(Error::NonFinite { t });
        }
        let keep = step == n || step % cfg.stride == 0;
        let smp = sample(m, &s, t)?;
        if keep {
            traj.times.push(t);
            traj.samples.push(smp);
            traj.states.push(s.clone());
        }
    }
    Ok(traj)
}

/// `sqrt(|zeta|_{H^s}^2 + |v|_{H^s}^2 + mu |v_x|_{H^s}^2)`
pub fn x_s_norm(s: &State, p: &Params, index: f64) -> Result<f64> {
    if s.role != VelocityRole::ShearMeanV || s.vel.len() != 1 || s.grid().dim() != 1 {
        return Err(Error::WrongState {
            model: "X^s norm",
            expected: "a one-dimensional shear mean velocity state (zeta, v)",
        });
    }
    let v = s.v();
    let a = sobolev_norm(&s.zeta, index);
    let b = sobolev_norm(v, index);
    let c = sobolev_norm(&dx(v), index);
    Ok((a * a + b * b + p.mu * c * c).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelId;
    use crate::params::{ClCoeffs, ClVariant};
    use crate::spectral::{shift_x, Field};
    use std::f64::consts::PI;

    #[test]
    fn step_count_lands_on_t_end() {
        let cfg = StepperConfig::new(0.3, 1.0);
        let (n, dt) = cfg.steps();
        assert_eq!(n, 4);
        assert!((n as f64 * dt - 1.0).abs() < 1e-15);
        assert_eq!(StepperConfig::new(0.25, 1.0).steps().0, 4);
        assert!(StepperConfig::new(0.0, 1.0).validate().is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid::periodic_1d(32).unwrap();
        let p = Params::new(0.5, 0.1, 0.0, 0.01, 1.0);
        for id in [ModelId::Sw1d, ModelId::Gn1d, ModelId::Chgn1d, ModelId::Bouss1d, ModelId::SymBouss1d] {
            let spec = ModelSpec::new(id, p);
            let traj = integrate(&spec, State::zeros(g, id), &StepperConfig::new(0.1, 0.5).with_stride(1)).unwrap();
            assert_eq!(traj.times.len(), 6);
            assert!(traj.states.iter().all(|s| s.sup_norm() == 0.0), "{id}");
        }
    }

    #[test]
    fn linear_transport_shifts_profile() {
        let g = Grid::periodic_1d(128).unwrap();
        let p = Params::new(0.5, 0.0, 0.0, 0.0, 1.0);
        let c = ClCoeffs::new(ClVariant::Unidirectional, 0.5, 1.0, 0.5, 0.0).unwrap();
        let spec = ModelSpec::new(ModelId::ClScalar, p).with_cl(c, 1.0);
        let u0 = Field::from_fn(g, |x, _| (-4.0 * (x - PI).powi(2)).exp());
        let traj = integrate(&spec, State::scalar(u0.clone()), &StepperConfig::new(1e-3, 1.0)).unwrap();
        let exact = shift_x(&u0, 1.0);
        assert!((&traj.final_state().zeta - &exact).l2_norm() <= 1e-8);
    }

    #[test]
    fn x_s_norm_examples() {
        let g = Grid::periodic_1d(32).unwrap();
        let p = Params::default();
        let zero = State::zeros(g, ModelId::Sw1d);
        assert_eq!(x_s_norm(&zero, &p, 0.0).unwrap(), 0.0);
        let s = State::new_1d(Field::from_fn(g, |x, _| x.sin()), Field::zeros(g), VelocityRole::ShearMeanV).unwrap();
        assert!((x_s_norm(&s, &p, 0.0).unwrap() - PI.sqrt()).abs() < 1e-12);
        let q = Params { mu: 1.0, ..p };
        let s = State::new_1d(Field::zeros(g), Field::from_fn(g, |x, _| x.sin()), VelocityRole::ShearMeanV).unwrap();
        assert!((x_s_norm(&s, &q, 0.0).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn depth_loss_aborts_with_condition() {
        let g = Grid::periodic_1d(32).unwrap();
        let p = Params::new(0.5, 1.0, 0.0, 0.01, 1.0);
        let spec = ModelSpec::new(ModelId::Sw1d, p);
        let s = State::new_1d(Field::from_fn(g, |x, _| 1.2 * x.sin()), Field::zeros(g), VelocityRole::ShearMeanV).unwrap();
        let err = integrate(&spec, s, &StepperConfig::new(0.01, 0.1)).unwrap_err();
        assert!(matches!(err, Error::AdmissibilityLost { t, .. } if t == 0.0));
        assert_eq!(err.condition(), Some("(H1) h₁ = 1−εζ"));
    }
}
