//! Scenario files.
//!
//! The format is line oriented: `key = value` pairs, `[section]` headers,
//! comma-separated lists and `#` comments. Keys before the first header are
//! top-level keys. Command-line overrides use the dotted form
//! `section.key=value`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use twolayer::analysis::{Path, ORDER_MUS};
use twolayer::models::{ModelId, ModelSpec, Tolerances};
use twolayer::params::{BoussinesqFamily, ClCoeffs, ClVariant, Params};
use twolayer::spectral::Grid;
use twolayer::timeloop::StepperConfig;

/// Where a setting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override(usize),
    /// Cross-field checks not tied to a single line.
    Config,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override(n) => write!(f, "override {n}"),
            Origin::Config => f.write_str("config"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub origin: Origin,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}: {}", self.origin, self.message)
        } else {
            write!(f, "{}: {}: {}", self.origin, self.key, self.message)
        }
    }
}

/// Every violation found in a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<Violation>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Order,
    Dispersion,
    Compare,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Order => "order",
            Mode::Dispersion => "dispersion",
            Mode::Compare => "compare",
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "order" | "residual-order" => Ok(Mode::Order),
            "dispersion" => Ok(Mode::Dispersion),
            "compare" => Ok(Mode::Compare),
            _ => Err(format!("unknown mode '{s}' (expected simulate, order, dispersion or compare)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Sine,
    Gaussian,
    /// `sech^2` bump of configurable width.
    SolitaryGuess,
    File,
}

impl Profile {
    fn as_str(&self) -> &'static str {
        match self {
            Profile::Sine => "sine",
            Profile::Gaussian => "gaussian",
            Profile::SolitaryGuess => "solitary-guess",
            Profile::File => "file",
        }
    }
}

impl FromStr for Profile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sine" => Ok(Profile::Sine),
            "gaussian" => Ok(Profile::Gaussian),
            "solitary-guess" => Ok(Profile::SolitaryGuess),
            "file" => Ok(Profile::File),
            _ => Err(format!("unknown profile '{s}' (expected sine, gaussian, solitary-guess or file)")),
        }
    }
}

/// A scalar field on the grid, either named or read from a CSV snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub profile: Profile,
    pub amplitude: f64,
    pub wavenumber: f64,
    pub width: f64,
    pub file: Option<PathBuf>,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        Self {
            profile: Profile::Sine,
            amplitude: 0.0,
            wavenumber: 1.0,
            width: 1.0,
            file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub zeta: ProfileSpec,
    /// One-dimensional models start from `v = v_scale * zeta` unless `v_file` is set.
    pub v_scale: f64,
    pub v_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub ny: Option<usize>,
    pub length: f64,
    pub ly: Option<f64>,
}

impl GridSpec {
    pub fn build(&self, dim: usize) -> twolayer::Result<Grid> {
        if dim == 1 {
            Grid::new_1d(self.n, self.length)
        } else {
            Grid::new_2d(self.n, self.ny.unwrap_or(self.n), self.length, self.ly.unwrap_or(self.length))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClSpec {
    pub variant: ClVariant,
    pub theta: f64,
    pub lambda: f64,
    pub sign: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonPath {
    Fixed,
    SqrtMu,
    Mu,
}

impl EpsilonPath {
    fn as_str(&self) -> &'static str {
        match self {
            EpsilonPath::Fixed => "fixed",
            EpsilonPath::SqrtMu => "sqrt_mu",
            EpsilonPath::Mu => "mu",
        }
    }

    pub fn path(&self, epsilon: f64) -> Path {
        match self {
            EpsilonPath::Fixed => Path::Fixed(epsilon),
            EpsilonPath::SqrtMu => Path::SqrtMu,
            EpsilonPath::Mu => Path::Mu,
        }
    }
}

impl FromStr for EpsilonPath {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fixed" => Ok(EpsilonPath::Fixed),
            "sqrt_mu" => Ok(EpsilonPath::SqrtMu),
            "mu" => Ok(EpsilonPath::Mu),
            _ => Err(format!("unknown epsilon path '{s}' (expected fixed, sqrt_mu or mu)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub mu: Vec<f64>,
    pub epsilon_path: EpsilonPath,
    pub k: Vec<f64>,
    /// Wavenumber of the dispersion-error fit.
    pub k_fit: f64,
    pub target: Option<f64>,
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub model: ModelId,
    /// Second model of `order` and `compare` runs.
    pub reference: Option<ModelId>,
    /// `None` switches tension on exactly when a tension parameter is non-zero.
    pub tension: Option<bool>,
    pub norm_index: f64,
    pub params: Params,
    pub family: BoussinesqFamily,
    pub cl: ClSpec,
    pub tolerances: Tolerances,
    pub grid: GridSpec,
    pub stepper: StepperConfig,
    pub initial: InitialSpec,
    pub topography: Option<ProfileSpec>,
    pub sweep: SweepSpec,
    pub output_dir: PathBuf,
    pub snapshots: bool,
}

/// Models whose state is a one-dimensional `(zeta, v)` pair.
pub fn is_primitive_1d(id: ModelId) -> bool {
    matches!(
        id,
        ModelId::Sw1d | ModelId::Gn1d | ModelId::Chgn1d | ModelId::Bouss1d | ModelId::SymBouss1d
    )
}

impl ScenarioConfig {
    pub fn grid(&self) -> twolayer::Result<Grid> {
        self.grid.build(self.model.dim())
    }

    /// The model `id` with every option of this scenario applied.
    pub fn model_spec(&self, id: ModelId) -> twolayer::Result<ModelSpec> {
        let mut m = ModelSpec::new(id, self.params)
            .with_family(self.family)
            .with_tolerances(self.tolerances);
        if let Some(on) = self.tension {
            m = m.with_tension(on);
        }
        if id == ModelId::ClScalar {
            let c = ClCoeffs::new(self.cl.variant, self.params.gamma, self.params.delta, self.cl.theta, self.cl.lambda)?;
            m = m.with_cl(c, self.cl.sign);
        }
        if let Some(topo) = &self.topography {
            let g = self.grid.build(id.dim())?;
            m = m.with_topography(crate::scenario::profile_field(topo, g)?);
        }
        Ok(m)
    }
}

struct Entry {
    value: String,
    origin: Origin,
}

fn split_line(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

/// Split the text into `section.key -> value` entries.
fn raw_entries(text: &str, errors: &mut Vec<Violation>) -> BTreeMap<String, Entry> {
    let mut out: BTreeMap<String, Entry> = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let origin = Origin::Line(i + 1);
        let line = split_line(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            match rest.strip_suffix(']') {
                Some(name) if !name.trim().is_empty() => section = name.trim().to_string(),
                _ => errors.push(Violation {
                    origin,
                    key: String::new(),
                    message: format!("malformed section header '{line}'"),
                }),
            }
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errors.push(Violation {
                origin,
                key: String::new(),
                message: format!("expected 'key = value', found '{line}'"),
            });
            continue;
        };
        let k = k.trim();
        if k.is_empty() {
            errors.push(Violation {
                origin,
                key: String::new(),
                message: "missing key before '='".into(),
            });
            continue;
        }
        let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
        if let Some(prev) = out.get(&key) {
            errors.push(Violation {
                origin,
                key: key.clone(),
                message: format!("duplicate key (first set on {})", prev.origin),
            });
            continue;
        }
        out.insert(
            key,
            Entry {
                value: v.trim().to_string(),
                origin,
            },
        );
    }
    out
}

/// Value of `key` in the text, without any validation.
pub fn lookup(text: &str, key: &str) -> Option<String> {
    raw_entries(text, &mut Vec::new()).remove(key).map(|e| e.value)
}

struct Reader {
    entries: BTreeMap<String, Entry>,
    used: BTreeSet<String>,
    errors: Vec<Violation>,
}

impl Reader {
    fn origin(&self, key: &str) -> Origin {
        self.entries.get(key).map_or(Origin::Config, |e| e.origin)
    }

    fn present(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn fail(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(Violation {
            origin: self.origin(key),
            key: key.to_string(),
            message: message.into(),
        });
    }

    fn get<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        self.used.insert(key.to_string());
        let e = self.entries.get(key)?;
        match parse(&e.value) {
            Ok(v) => Some(v),
            Err(msg) => {
                self.fail(key, msg);
                None
            }
        }
    }

    fn f64(&mut self, key: &str, default: f64) -> f64 {
        self.get(key, parse_f64).unwrap_or(default)
    }

    fn opt_f64(&mut self, key: &str) -> Option<f64> {
        self.get(key, parse_f64)
    }

    fn usize(&mut self, key: &str, default: usize) -> usize {
        self.get(key, parse_usize).unwrap_or(default)
    }

    fn bool(&mut self, key: &str, default: bool) -> bool {
        self.get(key, parse_bool).unwrap_or(default)
    }

    fn list(&mut self, key: &str) -> Option<Vec<f64>> {
        self.get(key, |s| {
            if s.is_empty() {
                return Ok(Vec::new());
            }
            s.split(',').map(|x| parse_f64(x.trim())).collect()
        })
    }

    fn parsed<T: FromStr<Err = String>>(&mut self, key: &str) -> Option<T> {
        self.get(key, |s| s.parse())
    }

    fn path(&mut self, key: &str) -> Option<PathBuf> {
        let p = self.get(key, |s| {
            if s.is_empty() {
                Err("expected a path".into())
            } else {
                Ok(PathBuf::from(s))
            }
        })?;
        if !p.exists() {
            self.fail(key, format!("file '{}' does not exist", p.display()));
        }
        Some(p)
    }

    fn check(&mut self, key: &str, ok: bool, message: impl Into<String>) {
        if !ok {
            self.fail(key, message);
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a number, found '{s}'"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite number, found '{s}'"))
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, found '{s}'"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(format!("expected true or false, found '{s}'")),
    }
}

fn parse_model(s: &str) -> Result<ModelId, String> {
    s.parse()
}

fn parse_variant(s: &str) -> Result<ClVariant, String> {
    match s {
        "unidirectional" => Ok(ClVariant::Unidirectional),
        "decoupled" => Ok(ClVariant::Decoupled),
        _ => Err(format!("unknown variant '{s}' (expected unidirectional or decoupled)")),
    }
}

fn variant_str(v: ClVariant) -> &'static str {
    match v {
        ClVariant::Unidirectional => "unidirectional",
        ClVariant::Decoupled => "decoupled",
    }
}

/// Parse and validate a scenario file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    parse_with_overrides(text, &[])
}

/// Parse a scenario file with `section.key=value` overrides applied on top.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<ScenarioConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let mut entries = raw_entries(text, &mut errors);
    for (i, o) in overrides.iter().enumerate() {
        let origin = Origin::Override(i + 1);
        match o.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                entries.insert(
                    k.trim().to_string(),
                    Entry {
                        value: v.trim().to_string(),
                        origin,
                    },
                );
            }
            _ => errors.push(Violation {
                origin,
                key: String::new(),
                message: format!("expected 'key=value', found '{o}'"),
            }),
        }
    }
    let mut r = Reader {
        entries,
        used: BTreeSet::new(),
        errors,
    };
    let cfg = read(&mut r);
    let unknown: Vec<String> = r.entries.keys().filter(|k| !r.used.contains(*k)).cloned().collect();
    for k in unknown {
        r.fail(&k, "unknown key");
    }
    let mut errors = r.errors;
    if errors.is_empty() {
        if let Err(e) = cfg.grid().and_then(|_| cfg.model_spec(cfg.model)).and_then(|m| m.validate()) {
            errors.push(Violation {
                origin: Origin::Config,
                key: String::new(),
                message: e.to_string(),
            });
        }
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        errors.sort_by_key(|v| match v.origin {
            Origin::Line(n) => (0, n),
            Origin::Override(n) => (1, n),
            Origin::Config => (2, 0),
        });
        Err(ConfigErrors(errors))
    }
}

fn read(r: &mut Reader) -> ScenarioConfig {
    let mode = r.parsed::<Mode>("mode").unwrap_or(Mode::Simulate);
    let model = match r.get("model", parse_model) {
        Some(m) => m,
        None => {
            if !r.present("model") {
                r.fail("model", "missing required key");
            }
            ModelId::Sw1d
        }
    };
    let reference = r.get("reference", parse_model);
    let tension = r.get("tension", parse_bool);
    let norm_index = r.f64("norm_index", 0.0);
    r.check("norm_index", norm_index >= 0.0, "norm_index must be non-negative");

    let params = read_params(r);

    let family = BoussinesqFamily {
        theta1: r.f64("boussinesq.theta1", 0.0),
        theta2: r.f64("boussinesq.theta2", 0.0),
        lambda1: r.f64("boussinesq.lambda1", 0.0),
        lambda2: r.f64("boussinesq.lambda2", 0.0),
    };
    for key in ["boussinesq.theta1", "boussinesq.theta2"] {
        let v = if key.ends_with('1') { family.theta1 } else { family.theta2 };
        r.check(key, v >= 0.0, "theta must be non-negative");
    }

    let cl = ClSpec {
        variant: r.get("cl.variant", parse_variant).unwrap_or(ClVariant::Unidirectional),
        theta: r.f64("cl.theta", 1.0),
        lambda: r.f64("cl.lambda", 0.0),
        sign: r.f64("cl.sign", 1.0),
    };
    r.check("cl.sign", cl.sign == 1.0 || cl.sign == -1.0, "sign must be 1 or -1");

    let d = Tolerances::default();
    let tolerances = Tolerances {
        neumann_tol: r.f64("solver.neumann_tol", d.neumann_tol),
        neumann_max_terms: r.usize("solver.neumann_max_terms", d.neumann_max_terms),
        unpack_tol: r.f64("solver.unpack_tol", d.unpack_tol),
        unpack_max_iter: r.usize("solver.unpack_max_iter", d.unpack_max_iter),
        cg_tol: r.f64("solver.cg_tol", d.cg_tol),
    };
    for (key, v) in [
        ("solver.neumann_tol", tolerances.neumann_tol),
        ("solver.unpack_tol", tolerances.unpack_tol),
        ("solver.cg_tol", tolerances.cg_tol),
    ] {
        r.check(key, v > 0.0, "tolerance must be positive");
    }
    for (key, v) in [
        ("solver.neumann_max_terms", tolerances.neumann_max_terms),
        ("solver.unpack_max_iter", tolerances.unpack_max_iter),
    ] {
        r.check(key, v > 0, "iteration limit must be at least 1");
    }

    let grid = GridSpec {
        n: r.usize("grid.n", 128),
        ny: r.get("grid.ny", parse_usize),
        length: r.f64("grid.length", 2.0 * PI),
        ly: r.opt_f64("grid.ly"),
    };
    r.check("grid.length", grid.length > 0.0, "length must be positive");
    if let Some(ly) = grid.ly {
        r.check("grid.ly", ly > 0.0, "ly must be positive");
    }
    if model.dim() == 1 {
        r.check("grid.ny", grid.ny.is_none(), format!("ny applies only to two-dimensional models, not {model}"));
        r.check("grid.ly", grid.ly.is_none(), format!("ly applies only to two-dimensional models, not {model}"));
    }
    let built = grid.build(model.dim());
    if let Err(e) = &built {
        r.fail("grid.n", e.to_string());
    }

    let default_dt = built.as_ref().map_or(0.01, StepperConfig::default_dt);
    let mut stepper = StepperConfig::new(r.f64("stepper.dt", default_dt), r.f64("stepper.t_end", 1.0));
    stepper.stride = r.usize("stepper.stride", 10);
    r.check("stepper.dt", stepper.dt > 0.0, "dt must be positive");
    r.check("stepper.t_end", stepper.t_end >= 0.0, "t_end must be non-negative");
    r.check("stepper.stride", stepper.stride > 0, "stride must be at least 1");

    let zeta = read_profile(r, "initial", built.as_ref().ok());
    let initial = InitialSpec {
        zeta,
        v_scale: r.f64("initial.v_scale", 0.0),
        v_file: r.path("initial.v_file"),
    };
    if model.dim() == 2 || model == ModelId::ClScalar {
        r.check("initial.v_scale", initial.v_scale == 0.0, format!("{model} starts at rest; v_scale must be 0"));
        r.check("initial.v_file", initial.v_file.is_none(), format!("{model} takes no velocity file"));
    }

    let topo_keys = ["profile", "amplitude", "wavenumber", "width", "file"];
    let topography = topo_keys
        .iter()
        .any(|k| r.present(&format!("topography.{k}")))
        .then(|| read_profile(r, "topography", built.as_ref().ok()));

    let sweep = read_sweep(r, mode);

    let output_dir = r.get("output.dir", |s| {
        if s.is_empty() {
            Err("expected a directory".to_string())
        } else {
            Ok(PathBuf::from(s))
        }
    });
    let snapshots = r.bool("output.snapshots", true);

    match mode {
        Mode::Simulate => {
            r.check("model", model != ModelId::Gn2d, "GN2D has no time evolution; use it in dispersion mode");
        }
        Mode::Order | Mode::Compare => {
            r.check(
                "model",
                is_primitive_1d(model),
                format!("{mode} mode needs a one-dimensional (zeta, v) model, not {model}"),
            );
            match reference {
                None => r.fail("reference", format!("{mode} mode needs a reference model")),
                Some(b) => r.check(
                    "reference",
                    is_primitive_1d(b),
                    format!("{mode} mode needs a one-dimensional (zeta, v) model, not {b}"),
                ),
            }
        }
        Mode::Dispersion => {}
    }

    ScenarioConfig {
        mode,
        model,
        reference,
        tension,
        norm_index,
        params,
        family,
        cl,
        tolerances,
        grid,
        stepper,
        initial,
        topography,
        sweep,
        output_dir: output_dir.unwrap_or_else(|| PathBuf::from("out")),
        snapshots,
    }
}

fn read_params(r: &mut Reader) -> Params {
    let d = Params::default();
    let mut p = Params::new(
        r.f64("params.gamma", d.gamma),
        r.f64("params.epsilon", d.epsilon),
        r.f64("params.beta", d.beta),
        r.f64("params.mu", d.mu),
        r.f64("params.delta", d.delta),
    );
    r.check("params.gamma", (0.0..1.0).contains(&p.gamma), "gamma must lie in [0,1)");
    r.check("params.epsilon", (0.0..=1.0).contains(&p.epsilon), "epsilon must lie in [0,1]");
    r.check("params.beta", (0.0..=1.0).contains(&p.beta), "beta must lie in [0,1]");
    r.check("params.mu", p.mu > 0.0, "mu must be positive");
    r.check("params.delta", p.delta > 0.0, "delta must be positive");
    let bond = r.opt_f64("params.bond_inv");
    let bo = r.opt_f64("params.bo_inv");
    if let Some(b) = bond {
        r.check("params.bond_inv", b >= 0.0, "bond_inv must be non-negative");
    }
    if let Some(b) = bo {
        r.check("params.bo_inv", b >= 0.0, "bo_inv must be non-negative");
    }
    match (bond, bo) {
        (Some(a), Some(b)) => {
            let implied = p.mu * b;
            if (a - implied).abs() > 1e-12 * a.abs().max(implied.abs()).max(1.0) {
                let later = |k| match r.origin(k) {
                    Origin::Line(n) => (0, n),
                    Origin::Override(n) => (1, n),
                    Origin::Config => (2, 0),
                };
                let key = if later("params.bo_inv") > later("params.bond_inv") {
                    "params.bo_inv"
                } else {
                    "params.bond_inv"
                };
                r.fail(
                    key,
                    format!("bond_inv = {a} and bo_inv = {b} disagree: bond_inv must equal mu * bo_inv = {implied}"),
                );
            }
            p.bond_inv = a;
            p.bo_inv = b;
        }
        (Some(a), None) => p = p.with_bond_inv(a),
        (None, Some(b)) => p = p.with_bo_inv(b),
        (None, None) => {}
    }
    p
}

fn read_profile(r: &mut Reader, section: &str, grid: Option<&Grid>) -> ProfileSpec {
    let key = |k: &str| format!("{section}.{k}");
    let d = ProfileSpec::default();
    let spec = ProfileSpec {
        profile: r.parsed(&key("profile")).unwrap_or(d.profile),
        amplitude: r.f64(&key("amplitude"), d.amplitude),
        wavenumber: r.f64(&key("wavenumber"), d.wavenumber),
        width: r.f64(&key("width"), d.width),
        file: r.path(&key("file")),
    };
    r.check(&key("width"), spec.width > 0.0, "width must be positive");
    match spec.profile {
        Profile::File => r.check(&key("file"), spec.file.is_some(), "profile = file needs a file"),
        _ => r.check(&key("file"), spec.file.is_none(), "file is only read with profile = file"),
    }
    if let (Profile::Sine, Some(g)) = (spec.profile, grid) {
        for axis in 0..g.dim() {
            let periods = spec.wavenumber * g.length(axis) / (2.0 * PI);
            if (periods - periods.round()).abs() > 1e-9 {
                r.fail(
                    &key("wavenumber"),
                    format!("wavenumber {} is not periodic on a domain of length {}", spec.wavenumber, g.length(axis)),
                );
                break;
            }
        }
    }
    spec
}

fn read_sweep(r: &mut Reader, mode: Mode) -> SweepSpec {
    let mu = r.list("sweep.mu").unwrap_or_else(|| match mode {
        Mode::Order => ORDER_MUS.to_vec(),
        _ => Vec::new(),
    });
    let k = r.list("sweep.k").unwrap_or_else(|| match mode {
        Mode::Dispersion => vec![0.5, 1.0, 2.0, 4.0, 8.0],
        _ => Vec::new(),
    });
    let sweep = SweepSpec {
        mu,
        epsilon_path: r.parsed("sweep.epsilon_path").unwrap_or(EpsilonPath::Fixed),
        k,
        k_fit: r.f64("sweep.k_fit", 1.0),
        target: r.opt_f64("sweep.target"),
        band: r.f64("sweep.band", 0.15),
    };
    r.check("sweep.mu", sweep.mu.iter().all(|&m| m > 0.0), "every mu must be positive");
    r.check("sweep.k", sweep.k.iter().all(|&k| k >= 0.0), "every k must be non-negative");
    r.check("sweep.k_fit", sweep.k_fit > 0.0, "k_fit must be positive");
    r.check("sweep.band", sweep.band > 0.0, "band must be positive");
    match mode {
        Mode::Order => r.check("sweep.mu", sweep.mu.len() >= 3, "order mode needs at least three mu values"),
        Mode::Dispersion => {
            r.check("sweep.k", !sweep.k.is_empty(), "dispersion mode needs at least one k");
            r.check(
                "sweep.mu",
                sweep.mu.is_empty() || sweep.mu.len() >= 3,
                "a dispersion fit needs at least three mu values",
            );
        }
        _ => {}
    }
    sweep
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn write_profile(f: &mut fmt::Formatter<'_>, p: &ProfileSpec) -> fmt::Result {
    writeln!(f, "profile = {}", p.profile.as_str())?;
    writeln!(f, "amplitude = {}", p.amplitude)?;
    writeln!(f, "wavenumber = {}", p.wavenumber)?;
    writeln!(f, "width = {}", p.width)?;
    if let Some(file) = &p.file {
        writeln!(f, "file = {}", file.display())?;
    }
    Ok(())
}

/// Canonical text form; parsing it gives back the same configuration.
impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode = {}", self.mode)?;
        writeln!(f, "model = {}", self.model)?;
        if let Some(b) = self.reference {
            writeln!(f, "reference = {b}")?;
        }
        if let Some(t) = self.tension {
            writeln!(f, "tension = {t}")?;
        }
        writeln!(f, "norm_index = {}", self.norm_index)?;

        let p = &self.params;
        writeln!(f, "\n[params]")?;
        writeln!(f, "gamma = {}", p.gamma)?;
        writeln!(f, "epsilon = {}", p.epsilon)?;
        writeln!(f, "beta = {}", p.beta)?;
        writeln!(f, "mu = {}", p.mu)?;
        writeln!(f, "delta = {}", p.delta)?;
        if p.bond_inv != 0.0 || p.bo_inv != 0.0 {
            writeln!(f, "bond_inv = {}", p.bond_inv)?;
            writeln!(f, "bo_inv = {}", p.bo_inv)?;
        }

        writeln!(f, "\n[boussinesq]")?;
        writeln!(f, "theta1 = {}", self.family.theta1)?;
        writeln!(f, "theta2 = {}", self.family.theta2)?;
        writeln!(f, "lambda1 = {}", self.family.lambda1)?;
        writeln!(f, "lambda2 = {}", self.family.lambda2)?;

        writeln!(f, "\n[cl]")?;
        writeln!(f, "variant = {}", variant_str(self.cl.variant))?;
        writeln!(f, "theta = {}", self.cl.theta)?;
        writeln!(f, "lambda = {}", self.cl.lambda)?;
        writeln!(f, "sign = {}", self.cl.sign)?;

        let t = &self.tolerances;
        writeln!(f, "\n[solver]")?;
        writeln!(f, "neumann_tol = {}", t.neumann_tol)?;
        writeln!(f, "neumann_max_terms = {}", t.neumann_max_terms)?;
        writeln!(f, "unpack_tol = {}", t.unpack_tol)?;
        writeln!(f, "unpack_max_iter = {}", t.unpack_max_iter)?;
        writeln!(f, "cg_tol = {}", t.cg_tol)?;

        writeln!(f, "\n[grid]")?;
        writeln!(f, "n = {}", self.grid.n)?;
        if let Some(ny) = self.grid.ny {
            writeln!(f, "ny = {ny}")?;
        }
        writeln!(f, "length = {}", self.grid.length)?;
        if let Some(ly) = self.grid.ly {
            writeln!(f, "ly = {ly}")?;
        }

        writeln!(f, "\n[stepper]")?;
        writeln!(f, "dt = {}", self.stepper.dt)?;
        writeln!(f, "t_end = {}", self.stepper.t_end)?;
        writeln!(f, "stride = {}", self.stepper.stride)?;

        writeln!(f, "\n[initial]")?;
        write_profile(f, &self.initial.zeta)?;
        writeln!(f, "v_scale = {}", self.initial.v_scale)?;
        if let Some(v) = &self.initial.v_file {
            writeln!(f, "v_file = {}", v.display())?;
        }

        if let Some(topo) = &self.topography {
            writeln!(f, "\n[topography]")?;
            write_profile(f, topo)?;
        }

        let s = &self.sweep;
        writeln!(f, "\n[sweep]")?;
        writeln!(f, "mu = {}", join(&s.mu))?;
        writeln!(f, "epsilon_path = {}", s.epsilon_path.as_str())?;
        writeln!(f, "k = {}", join(&s.k))?;
        writeln!(f, "k_fit = {}", s.k_fit)?;
        if let Some(target) = s.target {
            writeln!(f, "target = {target}")?;
        }
        writeln!(f, "band = {}", s.band)?;

        writeln!(f, "\n[output]")?;
        writeln!(f, "dir = {}", self.output_dir.display())?;
        writeln!(f, "snapshots = {}", self.snapshots)
    }
}
