//! Scenario execution and artifact output.

use std::fs;
use std::io;
use std::path::{Path as FsPath, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use twolayer::analysis::{compare_trajectories, dispersion_order, full_euler_dispersion, model_dispersion, residual_order, OrderFit};
use twolayer::models::{ModelId, ModelSpec, State, VelocityRole};
use twolayer::snapshot;
use twolayer::spectral::{Field, Grid, VecField};
use twolayer::timeloop::{integrate, Trajectory};
use twolayer::Error;

use crate::config::{ConfigErrors, Mode, Profile, ProfileSpec, ScenarioConfig};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ConfigError,
    AdmissibilityLost,
    SolverFailure,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ConfigError => 1,
            Status::AdmissibilityLost => 2,
            Status::SolverFailure => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub description: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorEntry {
    pub kind: Status,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub program: &'static str,
    pub version: &'static str,
    pub mode: Option<String>,
    pub status: Status,
    pub exit_code: i32,
    /// Canonical text of the configuration that was run.
    pub config: Option<String>,
    pub files: Vec<FileEntry>,
    pub results: Value,
    pub errors: Vec<ErrorEntry>,
}

impl Manifest {
    fn new(mode: Option<Mode>, config: Option<String>) -> Self {
        Self {
            program: "twolayer",
            version: env!("CARGO_PKG_VERSION"),
            mode: mode.map(|m| m.as_str().to_string()),
            status: Status::Ok,
            exit_code: 0,
            config,
            files: Vec::new(),
            results: Value::Null,
            errors: Vec::new(),
        }
    }

    fn fail(&mut self, entry: ErrorEntry) {
        self.status = entry.kind;
        self.exit_code = entry.kind.exit_code();
        self.errors.push(entry);
    }

    pub fn write(&self, dir: &FsPath) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// Manifest for a configuration that failed to parse.
pub fn config_error_manifest(mode: Option<Mode>, errors: &ConfigErrors) -> Manifest {
    let mut m = Manifest::new(mode, None);
    for v in &errors.0 {
        m.fail(ErrorEntry {
            kind: Status::ConfigError,
            message: if v.key.is_empty() { v.message.clone() } else { format!("{}: {}", v.key, v.message) },
            condition: None,
            time: None,
            location: Some(v.origin.to_string()),
        });
    }
    m
}

fn root(e: &Error) -> &Error {
    match e {
        Error::AdmissibilityLost { source, .. } | Error::AtSweepPoint { source, .. } => root(source),
        _ => e,
    }
}

/// Classify a library error by exit status.
pub fn classify(e: &Error) -> Status {
    if e.is_admissibility() {
        return Status::AdmissibilityLost;
    }
    match root(e) {
        Error::InvalidGrid(_)
        | Error::InvalidParameter { .. }
        | Error::GridMismatch
        | Error::Inadmissible(_)
        | Error::WrongState { .. }
        | Error::Unsupported(_)
        | Error::Io(_) => Status::ConfigError,
        _ => Status::SolverFailure,
    }
}

fn error_entry(e: &Error) -> ErrorEntry {
    let time = match e {
        Error::AdmissibilityLost { t, .. } | Error::NonFinite { t } => Some(*t),
        _ => None,
    };
    let location = match e {
        Error::AtSweepPoint { mu, .. } => Some(format!("mu = {mu}")),
        _ => None,
    };
    ErrorEntry {
        kind: classify(e),
        message: e.to_string(),
        condition: e.condition().map(str::to_string),
        time,
        location,
    }
}

/// Files written so far; only these are declared in the manifest.
struct Artifacts<'a> {
    dir: &'a FsPath,
    files: Vec<FileEntry>,
}

impl Artifacts<'_> {
    fn table(&mut self, name: &str, description: &str, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        self.declare(name, description, header, rows.len());
        Ok(())
    }

    fn snapshot(&mut self, name: &str, description: &str, f: &Field) -> io::Result<()> {
        let file = fs::File::create(self.dir.join(name))?;
        snapshot::write_csv(f, io::BufWriter::new(file)).map_err(io::Error::other)?;
        let header: &[&str] = if f.grid().dim() == 1 { &["x", "value"] } else { &["x", "y", "value"] };
        self.declare(name, description, header, f.grid().len());
        Ok(())
    }

    fn declare(&mut self, name: &str, description: &str, header: &[&str], rows: usize) {
        self.files.push(FileEntry {
            name: name.to_string(),
            description: description.to_string(),
            columns: header.iter().map(|s| s.to_string()).collect(),
            rows,
        });
    }
}

/// Result of one scenario run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
}

/// Run the scenario, writing CSV files and `manifest.json` into its output directory.
pub fn run_scenario(cfg: &ScenarioConfig) -> io::Result<Outcome> {
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir)?;
    let mut manifest = Manifest::new(Some(cfg.mode), Some(cfg.to_string()));
    let mut art = Artifacts { dir, files: Vec::new() };
    let run = match cfg.mode {
        Mode::Simulate => simulate(cfg, &mut art),
        Mode::Order => order(cfg, &mut art),
        Mode::Dispersion => dispersion(cfg, &mut art),
        Mode::Compare => compare(cfg, &mut art),
    };
    manifest.files = art.files;
    match run {
        Ok(Ok(results)) => manifest.results = results,
        Ok(Err(e)) => manifest.fail(error_entry(&e)),
        Err(e) => {
            manifest.fail(ErrorEntry {
                kind: Status::SolverFailure,
                message: format!("writing artifacts: {e}"),
                condition: None,
                time: None,
                location: None,
            });
        }
    }
    let manifest_path = manifest.write(dir)?;
    Ok(Outcome {
        exit_code: manifest.exit_code,
        manifest,
        manifest_path,
    })
}

type ModeResult = io::Result<twolayer::Result<Value>>;

macro_rules! lib {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Ok(Err(e)),
        }
    };
}

/// Sample a named or file profile on `g`.
pub fn profile_field(p: &ProfileSpec, g: Grid) -> twolayer::Result<Field> {
    let a = p.amplitude;
    let (k, w) = (p.wavenumber, p.width);
    let (cx, cy) = (0.5 * g.length(0), if g.dim() == 2 { 0.5 * g.length(1) } else { 0.0 });
    let two = g.dim() == 2;
    Ok(match p.profile {
        Profile::Sine => Field::from_fn(g, |x, y| a * (k * x).sin() * if two { (k * y).cos() } else { 1.0 }),
        Profile::Gaussian => Field::from_fn(g, |x, y| {
            let r2 = (x - cx).powi(2) + if two { (y - cy).powi(2) } else { 0.0 };
            a * (-r2 / (w * w)).exp()
        }),
        Profile::SolitaryGuess => Field::from_fn(g, |x, _| a / ((x - cx) / w).cosh().powi(2)),
        Profile::File => {
            let path = p.file.as_ref().ok_or_else(|| Error::Io("profile = file needs a file".into()))?;
            let f = fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            snapshot::read_csv(g, io::BufReader::new(f))?
        }
    })
}

/// Initial `(zeta, v)` of a one-dimensional run.
fn primitive_initial(cfg: &ScenarioConfig, g: Grid) -> twolayer::Result<(Field, Field)> {
    let zeta = profile_field(&cfg.initial.zeta, g)?;
    let v = match &cfg.initial.v_file {
        Some(path) => {
            let f = fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            snapshot::read_csv(g, io::BufReader::new(f))?
        }
        None => zeta.scale(cfg.initial.v_scale),
    };
    Ok((zeta, v))
}

fn initial_state(cfg: &ScenarioConfig, m: &ModelSpec, g: Grid) -> twolayer::Result<State> {
    match m.id {
        ModelId::ClScalar => Ok(State::scalar(profile_field(&cfg.initial.zeta, g)?)),
        ModelId::Sw2d | ModelId::Gn2d => State::new_vec(
            profile_field(&cfg.initial.zeta, g)?,
            VecField::zeros(g),
            m.id.role(),
        ),
        _ => {
            let (zeta, v) = primitive_initial(cfg, g)?;
            m.from_primitive(zeta, v)
        }
    }
}

fn fit_json(fit: &OrderFit, target: Option<f64>, band: f64) -> Value {
    json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "max_deviation": fit.max_deviation,
        "degenerate": fit.degenerate,
        "target": target,
        "band": band,
        "verdict": target.map(|t| format!("{:?}", fit.verdict(t, band)).to_lowercase()),
    })
}

fn simulate(cfg: &ScenarioConfig, art: &mut Artifacts) -> ModeResult {
    let g = lib!(cfg.grid());
    let m = lib!(cfg.model_spec(cfg.model));
    let s0 = lib!(initial_state(cfg, &m, g));
    let traj = lib!(integrate(&m, s0, &cfg.stepper));

    let first = &traj.samples[0];
    let mut header = vec!["t", "mean_zeta", "max_abs_zeta"];
    if first.mean_vel.is_some() {
        header.push("mean_vel");
    }
    if first.energy.is_some() {
        header.push("energy");
    }
    let rows: Vec<Vec<f64>> = traj
        .samples
        .iter()
        .zip(&traj.states)
        .map(|(smp, s)| {
            let mut row = vec![smp.t, smp.mean_zeta, s.zeta.sup_norm()];
            row.extend(smp.mean_vel);
            row.extend(smp.energy);
            row
        })
        .collect();
    art.table("monitor.csv", "conserved quantities and amplitude at each output time", &header, &rows)?;

    if first.min_depth.is_some() || first.margin.is_some() {
        let mut header = vec!["t"];
        if first.min_depth.is_some() {
            header.push("min_depth");
        }
        if first.margin.is_some() {
            header.push("smallest_margin");
        }
        let rows: Vec<Vec<f64>> = traj
            .samples
            .iter()
            .map(|smp| {
                let mut row = vec![smp.t];
                row.extend(smp.min_depth);
                row.extend(smp.margin.map(|(_, v)| v));
                row
            })
            .collect();
        art.table("margins.csv", "admissibility margins at each output time", &header, &rows)?;
    }

    if cfg.snapshots {
        let last = traj.final_state();
        art.snapshot("zeta_final.csv", "interface deformation at the final time", &last.zeta)?;
        match m.id {
            ModelId::ClScalar => {}
            ModelId::Sw2d | ModelId::Gn2d => {
                art.snapshot("vx_final.csv", "shear velocity, x component, at the final time", &last.vel[0])?;
                art.snapshot("vy_final.csv", "shear velocity, y component, at the final time", &last.vel[1])?;
            }
            _ => {
                let (_, v) = lib!(m.to_primitive(last));
                art.snapshot("v_final.csv", "shear mean velocity at the final time", &v)?;
            }
        }
    }

    let margin_name = first.margin.map(|(name, _)| name);
    Ok(Ok(json!({
        "final_time": traj.final_time(),
        "outputs": traj.times.len(),
        "mean_zeta_drift": traj.mean_zeta_drift(),
        "mean_vel_drift": traj.mean_vel_drift(),
        "energy_drift": traj.energy_drift(),
        "smallest_margin_condition": margin_name,
    })))
}

fn order(cfg: &ScenarioConfig, art: &mut Artifacts) -> ModeResult {
    let g = lib!(cfg.grid());
    let reference = cfg.reference.expect("validated: order mode has a reference model");
    let a = lib!(cfg.model_spec(cfg.model));
    let b = lib!(cfg.model_spec(reference));
    let path = cfg.sweep.epsilon_path.path(cfg.params.epsilon);
    let fit = lib!(residual_order(&a, &b, g, path, &cfg.sweep.mu, cfg.norm_index));
    let rows: Vec<Vec<f64>> = fit
        .abscissae
        .iter()
        .zip(&fit.residuals)
        .map(|(&mu, &r)| vec![mu, path.epsilon(mu), r])
        .collect();
    art.table(
        "order.csv",
        "tendency difference between the two models on the reference state",
        &["mu", "epsilon", "residual"],
        &rows,
    )?;
    Ok(Ok(json!({
        "pair": [cfg.model.as_str(), reference.as_str()],
        "fit": fit_json(&fit, cfg.sweep.target, cfg.sweep.band),
    })))
}

fn dispersion(cfg: &ScenarioConfig, art: &mut Artifacts) -> ModeResult {
    let m = lib!(cfg.model_spec(cfg.model));
    let p = m.effective_params();
    let mut rows = Vec::with_capacity(cfg.sweep.k.len());
    for &k in &cfg.sweep.k {
        let c = lib!(model_dispersion(&m, k));
        rows.push(vec![k, c, full_euler_dispersion(k, &p)]);
    }
    art.table(
        "dispersion.csv",
        "phase speed of the model and of the full two-layer system",
        &["k", "c_model", "c_euler"],
        &rows,
    )?;
    let mut results = json!({ "model": cfg.model.as_str(), "mu": p.mu });
    if !cfg.sweep.mu.is_empty() {
        let fit = lib!(dispersion_order(&m, cfg.sweep.k_fit, &cfg.sweep.mu));
        let rows: Vec<Vec<f64>> = fit
            .abscissae
            .iter()
            .zip(&fit.residuals)
            .map(|(&mu, &r)| vec![mu, r])
            .collect();
        art.table(
            "dispersion_order.csv",
            "squared phase-speed error against the full system at k_fit",
            &["mu", "residual"],
            &rows,
        )?;
        results["k_fit"] = json!(cfg.sweep.k_fit);
        results["fit"] = fit_json(&fit, cfg.sweep.target, cfg.sweep.band);
    }
    Ok(Ok(results))
}

fn as_primitive(m: &ModelSpec, traj: &Trajectory) -> twolayer::Result<Trajectory> {
    let states = traj
        .states
        .iter()
        .map(|s| {
            let (z, v) = m.to_primitive(s)?;
            State::new_1d(z, v, VelocityRole::ShearMeanV)
        })
        .collect::<twolayer::Result<Vec<_>>>()?;
    Ok(Trajectory {
        times: traj.times.clone(),
        states,
        samples: traj.samples.clone(),
    })
}

fn compare(cfg: &ScenarioConfig, art: &mut Artifacts) -> ModeResult {
    let g = lib!(cfg.grid());
    let reference = cfg.reference.expect("validated: compare mode has a reference model");
    let a = lib!(cfg.model_spec(cfg.model));
    let b = lib!(cfg.model_spec(reference));
    let (zeta, v) = lib!(primitive_initial(cfg, g));
    let ta = lib!(integrate(&a, lib!(a.from_primitive(zeta.clone(), v.clone())), &cfg.stepper).and_then(|t| as_primitive(&a, &t)));
    let tb = lib!(integrate(&b, lib!(b.from_primitive(zeta, v)), &cfg.stepper).and_then(|t| as_primitive(&b, &t)));
    let series = lib!(compare_trajectories(&ta, &tb, &cfg.params, cfg.norm_index));
    let rows: Vec<Vec<f64>> = series.iter().map(|&(t, d)| vec![t, d]).collect();
    art.table(
        "compare.csv",
        "distance between the two trajectories in (zeta, v)",
        &["t", "distance"],
        &rows,
    )?;
    let max = series.iter().map(|&(_, d)| d).fold(0.0, f64::max);
    Ok(Ok(json!({
        "pair": [cfg.model.as_str(), reference.as_str()],
        "norm_index": cfg.norm_index,
        "final_distance": series.last().map(|&(_, d)| d),
        "max_distance": max,
    })))
}
