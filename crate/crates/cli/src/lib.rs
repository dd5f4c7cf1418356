//! Experiment harness around `fmrl-core`: reads a flat TOML config, runs the
//! configured grid of lifelong experiments and writes plot-ready tables.

pub mod compare;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod qg;

use std::path::{Path, PathBuf};
use std::time::Instant;

use fmrl_core::registry::Registry;

pub use config::{Command, ExperimentConfig, Plan};
pub use error::{CliError, Result};

/// Loads and validates a config for `command`.
pub fn load_plan(path: &Path, command: Command, registry: &Registry) -> Result<Plan> {
    ExperimentConfig::load(path)?.validate(command, registry)
}

/// What a finished command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    /// One human-readable line per cell.
    pub lines: Vec<String>,
}

/// Runs `run`, `adversary` or `qg` for the config at `path`, writing under
/// `root`.
pub fn execute(command: Command, path: &Path, root: &Path) -> Result<Outcome> {
    let registry = Registry::builtin();
    let plan = load_plan(path, command, &registry)?;
    let out = plan.config.output_dir(root);
    let base = path.parent().unwrap_or(Path::new("."));
    let start = Instant::now();
    let lines = match command {
        Command::Qg => {
            let rows = qg::run_qg(&plan, &registry)?;
            let summary = qg::summarize(&plan, &rows);
            qg::write_qg(&out, &rows, &summary)?;
            let mut lines: Vec<String> = summary
                .points
                .iter()
                .map(|p| format!("m={} mean_alpha={:.6}", p.m, p.mean_alpha.0))
                .collect();
            lines.push(format!("slope={:.6}", summary.slope.0));
            lines
        }
        _ => {
            let cells = experiment::run_cells(&plan, &registry, command, base)?;
            experiment::write_artifacts(&plan, command, &cells, &out, start.elapsed().as_secs_f64())?;
            cells
                .iter()
                .map(|c| {
                    let mut line = format!(
                        "{} m={} seed={} TAR={:.6} violations={}",
                        c.variant,
                        c.m,
                        c.seed,
                        c.ledger.tar(),
                        c.ledger.violations()
                    );
                    if let Some(b) = c.envelope {
                        line.push_str(&format!(" envelope={b:.6}"));
                    }
                    if let Some(b) = c.lower_bound {
                        line.push_str(&format!(" lower_bound={b:.6}"));
                    }
                    line
                })
                .collect()
        }
    };
    Ok(Outcome { out_dir: out, lines })
}

/// Runs `compare` and returns the CSV text and an optional warning.
pub fn compare(paths: &[PathBuf]) -> Result<(String, Option<String>)> {
    let cmp = compare::align(compare::load_series(paths)?);
    if cmp.aligned.is_empty() {
        return Err(CliError::Runtime("the summaries share no (m, seed) cells".into()));
    }
    Ok((cmp.render(), cmp.warning()))
}
