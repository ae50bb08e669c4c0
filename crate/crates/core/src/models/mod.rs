//! The model hierarchy behind one "time derivative from state" contract.

mod boussinesq;
mod chgn;
mod gn;
mod gn2d;
mod scalar;
mod sw;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use boussinesq::{
    boussinesq_from_primitive, boussinesq_rhs, boussinesq_to_primitive, sym_boussinesq_rhs, sym_energy,
    SYM_MASS_CONDITION,
};
pub use chgn::chgn1d_rhs;
pub use gn::{gn1d_pack, gn1d_pack_flat, gn1d_rhs, gn1d_rhs_flat, gn1d_tendency, gn1d_unpack, gn1d_unpack_flat};
pub use gn2d::{gn2d_mass_tendency, gn2d_residual, gn_momentum_operator};
pub use scalar::{build_unidirectional_ic, cl_rhs, decoupled_evolve, underline_v};
pub use sw::{sw1d_hyperbolicity, sw1d_rhs, sw2d_rhs, HYPERBOLICITY_CONDITION};

use crate::error::{Error, Result};
use crate::operators::{DepthFields, Mft, NeumannOptions};
use crate::params::{BoussinesqFamily, BoussinesqOps, ChgnCoeffs, ClCoeffs, Params, SymBoussinesqOps};
use crate::spectral::{Field, Grid, VecField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelId {
    #[serde(rename = "SW1D")]
    Sw1d,
    #[serde(rename = "SW2D")]
    Sw2d,
    #[serde(rename = "GN1D")]
    Gn1d,
    #[serde(rename = "CHGN1D")]
    Chgn1d,
    #[serde(rename = "BOUSS1D")]
    Bouss1d,
    #[serde(rename = "SYMBOUSS1D")]
    SymBouss1d,
    #[serde(rename = "CL_SCALAR")]
    ClScalar,
    #[serde(rename = "GN2D")]
    Gn2d,
}

impl ModelId {
    pub const ALL: [ModelId; 8] = [
        ModelId::Sw1d,
        ModelId::Sw2d,
        ModelId::Gn1d,
        ModelId::Chgn1d,
        ModelId::Bouss1d,
        ModelId::SymBouss1d,
        ModelId::ClScalar,
        ModelId::Gn2d,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelId::Sw1d => "SW1D",
            ModelId::Sw2d => "SW2D",
            ModelId::Gn1d => "GN1D",
            ModelId::Chgn1d => "CHGN1D",
            ModelId::Bouss1d => "BOUSS1D",
            ModelId::SymBouss1d => "SYMBOUSS1D",
            ModelId::ClScalar => "CL_SCALAR",
            ModelId::Gn2d => "GN2D",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelId::Sw2d | ModelId::Gn2d => 2,
            _ => 1,
        }
    }

    /// Role of the velocity slot in the prognostic state.
    pub fn role(&self) -> VelocityRole {
        match self {
            ModelId::Sw2d => VelocityRole::ShearV,
            ModelId::Gn1d => VelocityRole::GnMomentumW,
            ModelId::ClScalar => VelocityRole::ScalarU,
            _ => VelocityRole::ShearMeanV,
        }
    }

    fn allows_topography(&self) -> bool {
        matches!(self, ModelId::Sw1d | ModelId::Sw2d | ModelId::Gn1d | ModelId::Gn2d)
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<_> = ModelId::ALL.iter().map(|m| m.as_str()).collect();
                format!("unknown model '{s}' (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityRole {
    ShearMeanV,
    ShearV,
    GnMomentumW,
    ScalarU,
}

/// Prognostic variables on a common grid.
///
/// Scalar models keep their unknown in `zeta` and leave `vel` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub zeta: Field,
    pub vel: Vec<Field>,
    pub role: VelocityRole,
}

impl State {
    pub fn new_1d(zeta: Field, v: Field, role: VelocityRole) -> Result<Self> {
        if !zeta.same_grid(&v) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            zeta,
            vel: vec![v],
            role,
        })
    }

    pub fn new_vec(zeta: Field, v: VecField, role: VelocityRole) -> Result<Self> {
        if v.grid() != zeta.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            zeta,
            vel: v.into_comps(),
            role,
        })
    }

    pub fn scalar(u: Field) -> Self {
        Self {
            zeta: u,
            vel: Vec::new(),
            role: VelocityRole::ScalarU,
        }
    }

    pub fn zeros(grid: Grid, model: ModelId) -> Self {
        let n = match model.role() {
            VelocityRole::ScalarU => 0,
            _ => grid.dim(),
        };
        Self {
            zeta: Field::zeros(grid),
            vel: (0..n).map(|_| Field::zeros(grid)).collect(),
            role: model.role(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.zeta.grid()
    }

    pub fn fields(&self) -> impl Iterator<Item = &Field> {
        std::iter::once(&self.zeta).chain(self.vel.iter())
    }

    pub fn v(&self) -> &Field {
        &self.vel[0]
    }

    pub fn velocity(&self) -> VecField {
        VecField::new(self.vel.clone()).expect("velocity components match the grid dimension")
    }

    fn zip(&self, other: &State, f: impl Fn(&Field, &Field) -> Field) -> State {
        State {
            zeta: f(&self.zeta, &other.zeta),
            vel: self.vel.iter().zip(&other.vel).map(|(a, b)| f(a, b)).collect(),
            role: self.role,
        }
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &State) -> State {
        self.zip(other, |a, b| a.axpy(c, b))
    }

    pub fn scale(&self, c: f64) -> State {
        State {
            zeta: self.zeta.scale(c),
            vel: self.vel.iter().map(|f| f.scale(c)).collect(),
            role: self.role,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.fields().all(Field::is_finite)
    }

    /// Largest sup norm over all components.
    pub fn sup_norm(&self) -> f64 {
        self.fields().fold(0.0, |m, f| m.max(f.sup_norm()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.fields().map(|f| f.inner(f)).sum::<f64>().sqrt()
    }
}

/// Tolerances forwarded to the iterative sub-solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub neumann_tol: f64,
    pub neumann_max_terms: usize,
    pub unpack_tol: f64,
    pub unpack_max_iter: usize,
    pub cg_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            neumann_tol: 1e-12,
            neumann_max_terms: 200,
            unpack_tol: 1e-11,
            unpack_max_iter: 100,
            cg_tol: 1e-11,
        }
    }
}

impl Tolerances {
    /// Uniform tightening used by the order measurements.
    pub fn tight() -> Self {
        Self {
            neumann_tol: 1e-14,
            unpack_tol: 1e-13,
            cg_tol: 1e-13,
            ..Self::default()
        }
    }

    pub fn neumann(&self) -> NeumannOptions {
        NeumannOptions {
            tol: self.neumann_tol,
            max_terms: self.neumann_max_terms,
        }
    }
}

/// Sign of the decoupled scalar wave (`+1` right-going, `-1` left-going).
pub type WaveSign = f64;

/// One system of the hierarchy with its options.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub id: ModelId,
    pub params: Params,
    /// Unscaled topography `b`; enters the equations as `beta * b`.
    pub topography: Option<Field>,
    pub family: BoussinesqFamily,
    pub cl: Option<ClCoeffs>,
    pub cl_sign: WaveSign,
    pub tension: bool,
    pub tol: Tolerances,
}

impl ModelSpec {
    pub fn new(id: ModelId, params: Params) -> Self {
        Self {
            id,
            params,
            topography: None,
            family: BoussinesqFamily::default(),
            cl: None,
            cl_sign: 1.0,
            tension: params.bond_inv > 0.0 || params.bo_inv > 0.0,
            tol: Tolerances::default(),
        }
    }

    pub fn with_topography(mut self, b: Field) -> Self {
        self.topography = Some(b);
        self
    }

    pub fn with_family(mut self, family: BoussinesqFamily) -> Self {
        self.family = family;
        self
    }

    pub fn with_cl(mut self, cl: ClCoeffs, sign: WaveSign) -> Self {
        self.cl = Some(cl);
        self.cl_sign = sign;
        self
    }

    pub fn with_tension(mut self, on: bool) -> Self {
        self.tension = on;
        self
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    /// Parameters as seen by the equations (tension removed when switched off).
    pub fn effective_params(&self) -> Params {
        let mut p = self.params;
        if !self.tension {
            p.bond_inv = 0.0;
            p.bo_inv = 0.0;
        }
        p
    }

    fn b(&self) -> Option<&Field> {
        self.topography.as_ref()
    }

    pub fn validate(&self) -> Result<()> {
        // the scalar equations stay meaningful in the dispersionless limit
        let mut checked = self.params;
        if self.id == ModelId::ClScalar && checked.mu == 0.0 {
            checked.mu = 1.0;
        }
        checked.validate()?;
        if self.topography.is_some() && !self.id.allows_topography() {
            return Err(Error::Unsupported(format!(
                "{} is a flat-bottom model; topography is not accepted",
                self.id
            )));
        }
        let p = self.effective_params();
        match self.id {
            ModelId::Chgn1d if p.bond_inv > 0.0 => Err(Error::Unsupported(
                "CHGN1D carries no surface tension; set bond_inv = 0 or tension = off".into(),
            )),
            ModelId::ClScalar => {
                if p.bond_inv > 0.0 || p.bo_inv > 0.0 {
                    return Err(Error::Unsupported("CL_SCALAR carries no surface tension".into()));
                }
                let c = self.cl.ok_or_else(|| Error::InvalidParameter {
                    name: "cl",
                    reason: "CL_SCALAR needs a coefficient set".into(),
                })?;
                c.require_admissible()?;
                if self.cl_sign.abs() != 1.0 {
                    return Err(Error::InvalidParameter {
                        name: "cl_sign",
                        reason: "wave sign must be +1 or -1".into(),
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn check_state(&self, s: &State) -> Result<()> {
        let expected = self.id.role();
        let comps = match expected {
            VelocityRole::ScalarU => 0,
            _ => self.id.dim(),
        };
        if s.role != expected || s.vel.len() != comps || s.grid().dim() != self.id.dim() {
            return Err(Error::WrongState {
                model: self.id.as_str(),
                expected: match expected {
                    VelocityRole::ShearMeanV => "a shear mean velocity state (zeta, v)",
                    VelocityRole::ShearV => "a 2D interface shear velocity state (zeta, V)",
                    VelocityRole::GnMomentumW => "a momentum state (zeta, w)",
                    VelocityRole::ScalarU => "a scalar state u",
                },
            });
        }
        if let Some(b) = self.b() {
            if b.grid() != s.grid() {
                return Err(Error::GridMismatch);
            }
        }
        Ok(())
    }

    /// Time derivative of the prognostic state.
    pub fn rhs(&self, s: &State) -> Result<State> {
        self.check_state(s)?;
        let p = self.effective_params();
        let b = self.b();
        let tol = &self.tol;
        match self.id {
            ModelId::Sw1d => sw1d_rhs(s, &p, b),
            ModelId::Sw2d => sw2d_rhs(s, &p, b, tol.neumann()),
            ModelId::Gn1d => gn1d_rhs(s, &p, b, tol),
            ModelId::Chgn1d => chgn1d_rhs(s, &p, &ChgnCoeffs::new(p.gamma, p.delta)?, tol.cg_tol),
            ModelId::Bouss1d => {
                let ops = BoussinesqOps::new(p.gamma, p.delta, p.bo_inv, self.family)?;
                boussinesq_rhs(s, &p, &ops)
            }
            ModelId::SymBouss1d => {
                let ops = SymBoussinesqOps::new(p.gamma, p.delta, p.bo_inv)?;
                sym_boussinesq_rhs(s, &p, &ops, tol.cg_tol)
            }
            ModelId::ClScalar => {
                let c = self.cl.ok_or_else(|| Error::InvalidParameter {
                    name: "cl",
                    reason: "CL_SCALAR needs a coefficient set".into(),
                })?;
                Ok(State::scalar(cl_rhs(&s.zeta, &p, &c, self.cl_sign)?))
            }
            ModelId::Gn2d => Err(Error::Unsupported(
                "GN2D is exposed as a residual evaluator only (see gn2d_residual)".into(),
            )),
        }
    }

    /// Admissibility margins; an error names the first violated condition.
    pub fn margins(&self, s: &State) -> Result<Margins> {
        self.check_state(s)?;
        let p = self.effective_params();
        let mut m = Margins::default();
        if self.id == ModelId::ClScalar {
            return Ok(m);
        }
        let d = DepthFields::new(&s.zeta, self.b(), &p)?;
        m.min_depth = Some(d.min_depth());
        match self.id {
            ModelId::Sw1d => {
                let (margin, node) = sw::hyperbolicity_argmin(&d, s.v(), &p);
                m.push(HYPERBOLICITY_CONDITION, margin);
                if margin <= 0.0 {
                    return Err(Error::Hyperbolicity { margin, node });
                }
            }
            ModelId::Sw2d | ModelId::Gn2d => {
                let xis: Vec<Field> = if self.id == ModelId::Sw2d {
                    let flat = 1.0 + p.gamma / p.delta;
                    vec![d.total.map(|t| t / flat - 1.0)]
                } else {
                    vec![s.zeta.scale(-p.epsilon), d.h2.map(|h| p.delta * h - 1.0)]
                };
                let xi_max = xis.iter().fold(0.0, |a: f64, x| a.max(x.sup_norm()));
                m.push("|xi|_inf < 1", 1.0 - xi_max);
                if xi_max >= 1.0 {
                    return Err(Error::Contraction { xi_max });
                }
            }
            ModelId::Chgn1d => {
                let mft = Mft::new(&s.zeta, &ChgnCoeffs::new(p.gamma, p.delta)?, &p)?;
                m.push("(H2) min(1+εκ₁ζ, 1+εκ₂ζ)", mft.margin());
            }
            ModelId::SymBouss1d => {
                let ops = SymBoussinesqOps::new(p.gamma, p.delta, p.bo_inv)?;
                let q = boussinesq::sym_mass_coefficient(&s.zeta, &p, &ops);
                let min = q.min();
                m.push(SYM_MASS_CONDITION, min);
                if min <= 0.0 {
                    return Err(Error::MassIndefinite {
                        condition: SYM_MASS_CONDITION,
                        min,
                    });
                }
            }
            _ => {}
        }
        Ok(m)
    }

    /// Conserved energy when the model has one (`E0` of the symmetric system).
    pub fn energy(&self, s: &State) -> Option<f64> {
        match self.id {
            ModelId::SymBouss1d => {
                let p = self.effective_params();
                let ops = SymBoussinesqOps::new(p.gamma, p.delta, p.bo_inv).ok()?;
                Some(sym_energy(s, &p, &ops))
            }
            _ => None,
        }
    }

    /// Build the prognostic state from `(zeta, v)` with `v` the shear mean velocity.
    pub fn from_primitive(&self, zeta: Field, v: Field) -> Result<State> {
        let p = self.effective_params();
        match self.id {
            ModelId::Gn1d => {
                let w = gn1d_pack(&zeta, &v, &p, self.b())?;
                State::new_1d(zeta, w, VelocityRole::GnMomentumW)
            }
            ModelId::Bouss1d => {
                let vt = boussinesq_from_primitive(&v, &p, &self.family);
                State::new_1d(zeta, vt, VelocityRole::ShearMeanV)
            }
            ModelId::Sw1d | ModelId::Chgn1d | ModelId::SymBouss1d => {
                State::new_1d(zeta, v, VelocityRole::ShearMeanV)
            }
            _ => Err(Error::Unsupported(format!(
                "{} has no one-dimensional (zeta, v) representation",
                self.id
            ))),
        }
    }

    /// Recover `(zeta, v)` from a prognostic state.
    pub fn to_primitive(&self, s: &State) -> Result<(Field, Field)> {
        self.check_state(s)?;
        let p = self.effective_params();
        match self.id {
            ModelId::Gn1d => {
                let (v, _) = gn1d_unpack(&s.zeta, s.v(), &p, self.b(), &self.tol)?;
                Ok((s.zeta.clone(), v))
            }
            ModelId::Bouss1d => Ok((s.zeta.clone(), boussinesq_to_primitive(s.v(), &p, &self.family))),
            ModelId::Sw1d | ModelId::Chgn1d | ModelId::SymBouss1d => Ok((s.zeta.clone(), s.v().clone())),
            _ => Err(Error::Unsupported(format!(
                "{} has no one-dimensional (zeta, v) representation",
                self.id
            ))),
        }
    }

    /// `(d_t zeta, d_t v)` in primitive variables at the state `(zeta, v)`.
    pub fn tendency(&self, zeta: &Field, v: &Field) -> Result<(Field, Field)> {
        let p = self.effective_params();
        match self.id {
            ModelId::Gn1d => gn1d_tendency(zeta, v, &p, self.b(), &self.tol),
            ModelId::Bouss1d => {
                let s = self.from_primitive(zeta.clone(), v.clone())?;
                let r = self.rhs(&s)?;
                Ok((r.zeta, boussinesq_to_primitive(&r.vel[0], &p, &self.family)))
            }
            _ => {
                let s = self.from_primitive(zeta.clone(), v.clone())?;
                let r = self.rhs(&s)?;
                Ok((r.zeta, r.vel[0].clone()))
            }
        }
    }
}

/// Named admissibility margins of a state (positive means admissible).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Margins {
    pub min_depth: Option<f64>,
    pub checks: Vec<(&'static str, f64)>,
}

impl Margins {
    fn push(&mut self, name: &'static str, value: f64) {
        self.checks.push((name, value));
    }

    /// Smallest named margin, if any.
    pub fn smallest(&self) -> Option<(&'static str, f64)> {
        self.checks
            .iter()
            .copied()
            .fold(None, |acc, c| match acc {
                Some((_, v)) if v <= c.1 => acc,
                _ => Some(c),
            })
    }
}
