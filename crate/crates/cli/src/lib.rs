//! Scenario files, runs and artifacts for the `twolayer` command.

pub mod config;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{parse_config, parse_with_overrides, ConfigErrors, Mode, ScenarioConfig};
pub use scenario::{run_scenario, Manifest, Outcome, Status};

/// Parse, run and report one invocation; returns the process exit code.
///
/// `mode` and `out` take precedence over the file's `mode` and `output.dir`.
pub fn run_cli(mode: Mode, config_path: &Path, out: Option<&Path>, overrides: &[String]) -> i32 {
    let text = match fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return Status::ConfigError.exit_code();
        }
    };
    let mut all = vec![format!("mode={}", mode.as_str())];
    if let Some(dir) = out {
        all.push(format!("output.dir={}", dir.display()));
    }
    all.extend(overrides.iter().cloned());

    let cfg = match parse_with_overrides(&text, &all) {
        Ok(cfg) => cfg,
        Err(errors) => {
            eprintln!("{} configuration error(s) in {}:", errors.0.len(), config_path.display());
            eprintln!("{errors}");
            let dir = out.map(Path::to_path_buf).or_else(|| config::lookup(&text, "output.dir").map(PathBuf::from));
            if let Some(dir) = dir {
                let m = scenario::config_error_manifest(Some(mode), &errors);
                if let Err(e) = m.write(&dir) {
                    eprintln!("error: cannot write manifest: {e}");
                }
            }
            return Status::ConfigError.exit_code();
        }
    };

    eprintln!("[twolayer] {} {} -> {}", cfg.mode, cfg.model, cfg.output_dir.display());
    match run_scenario(&cfg) {
        Ok(outcome) => {
            for e in &outcome.manifest.errors {
                eprintln!("error: {}", e.message);
            }
            eprintln!(
                "[twolayer] status {:?}, {} file(s), manifest {}",
                outcome.manifest.status,
                outcome.manifest.files.len(),
                outcome.manifest_path.display()
            );
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            Status::SolverFailure.exit_code()
        }
    }
}
