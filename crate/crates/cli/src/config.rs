//! Flat TOML experiment configuration.
//!
//! Every key is explicit. The similarity guess (`epsilon`, `gamma`) and the
//! seeds have no defaults because silently chosen values make regret numbers
//! impossible to reproduce from the config alone.

use std::path::{Path, PathBuf};

use fmrl_core::analysis::FwConfig;
use fmrl_core::fmrl::GuessConfig;
use fmrl_core::geometry::ConvexSet;
use fmrl_core::registry::Registry;
use fmrl_core::tasks::OracleConfig;
use fmrl_core::within_task::SolverConfig;
use fmrl_core::Point;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Directory under the output root; defaults to `name`.
    pub output: Option<String>,

    pub geometry: String,
    /// `ball` or `simplex`.
    pub set: String,
    pub radius: Option<f64>,
    pub simplex_floor: Option<f64>,

    pub variants: Vec<String>,
    pub meta: String,
    pub within: String,

    /// `doubling`, `fixed` or `tuned`.
    pub guess: String,
    pub epsilon: Option<f64>,
    pub gamma: Option<f64>,
    pub known_similarity: Option<bool>,
    /// The value of a `fixed` guess.
    pub similarity: Option<f64>,

    /// `clustered_logistic`, `quadratic`, `csv` or `adversary`.
    pub source: String,
    pub d: usize,
    pub tasks: Option<usize>,
    pub m: Option<usize>,
    pub m_sweep: Option<Vec<usize>>,
    pub seeds: Vec<u64>,

    /// Cluster center as `center_norm · e₁`.
    pub center_norm: Option<f64>,
    pub classes: Option<usize>,
    pub cluster_radius: Option<f64>,
    pub feature_scale: Option<f64>,
    pub task_spread: Option<f64>,
    pub sample_spread: Option<f64>,
    pub scale: Option<f64>,
    pub csv_path: Option<PathBuf>,
    pub standardize: Option<bool>,
    /// Adversary task diameter `D*`.
    pub diameter: Option<f64>,
    /// Adversary gradient bound `G`.
    pub lipschitz: Option<f64>,
    /// Raises every task's `G_t` to at least this value.
    pub lipschitz_override: Option<f64>,

    pub solver_tol: Option<f64>,
    pub solver_max_iters: Option<usize>,
    pub oracle_tol: Option<f64>,
    pub oracle_fail_tol: Option<f64>,
    pub oracle_max_iters: Option<usize>,

    /// Online-to-batch trials per cell (quadratic source only).
    pub batch_trials: Option<usize>,
    pub batch_delta: Option<f64>,

    pub qg_estimator: Option<String>,
    pub qg_deltas: Option<Vec<f64>>,
    pub qg_m: Option<Vec<usize>>,
    pub fw_max_iters: Option<usize>,
    pub fw_gap_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Qg,
    Adversary,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    ClusteredLogistic {
        classes: usize,
        cluster_radius: f64,
        feature_scale: f64,
    },
    Quadratic {
        task_spread: f64,
        sample_spread: f64,
        scale: f64,
    },
    Csv {
        path: PathBuf,
        classes: Option<usize>,
        standardize: bool,
    },
    Adversary {
        diameter: f64,
        lipschitz: f64,
    },
}

/// How each cell's similarity guess is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GuessPlan {
    Given(GuessConfig),
    /// `ε = D(1 + ln T)/T`, `γ = (1 + ln T)/ln T` with `D = max(D*, √max B)`
    /// measured on the cell's stream.
    Tuned,
}

#[derive(Debug, Clone)]
pub struct QgPlan {
    pub estimator: String,
    pub deltas: Vec<f64>,
    pub ms: Vec<usize>,
    pub fw: FwConfig,
}

/// A configuration after validation, with all strategies resolved.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: ExperimentConfig,
    pub hash: String,
    pub set: ConvexSet,
    pub phi1: Point,
    pub center: Point,
    pub source: Source,
    pub guess: GuessPlan,
    pub tasks: usize,
    pub ms: Vec<usize>,
    pub sweep: bool,
    pub solver: SolverConfig,
    pub oracle: OracleConfig,
    pub batch: Option<(usize, f64)>,
    pub qg: Option<QgPlan>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config: {e}")))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].lines().count().max(1));
            let msg = e.message().replace('\n', " ");
            match line {
                Some(l) => CliError::config(format!("line {l}: {}", msg.trim())),
                None => CliError::config(msg.trim().to_string()),
            }
        })
    }

    /// SHA-256 of the config's canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn output_dir(&self, root: &Path) -> PathBuf {
        root.join(self.output.as_deref().unwrap_or(&self.name))
    }

    pub fn validate(&self, command: Command, registry: &Registry) -> Result<Plan> {
        Validator { cfg: self, registry }.plan(command)
    }
}

struct Validator<'a> {
    cfg: &'a ExperimentConfig,
    registry: &'a Registry,
}

fn need<T: Copy>(value: Option<T>, key: &str, when: &str) -> Result<T> {
    value.ok_or_else(|| CliError::config(format!("missing key `{key}` (required {when})")))
}

fn positive(value: f64, key: &str) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::config(format!("`{key}` must be positive, got {value}")))
    }
}

fn nonnegative(value: f64, key: &str) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::config(format!("`{key}` must be nonnegative, got {value}")))
    }
}

fn core_config(e: fmrl_core::Error) -> CliError {
    CliError::config(e.to_string())
}

impl Validator<'_> {
    fn plan(&self, command: Command) -> Result<Plan> {
        let cfg = self.cfg;
        if cfg.name.trim().is_empty() {
            return Err(CliError::config("`name` must not be empty"));
        }
        if let Some(out) = &cfg.output {
            if out.is_empty() || Path::new(out).is_absolute() || out.contains("..") {
                return Err(CliError::config("`output` must be a relative directory name"));
            }
        }
        if cfg.d == 0 {
            return Err(CliError::config("`d` must be at least 1"));
        }
        if cfg.seeds.is_empty() {
            return Err(CliError::config("`seeds` must list at least one seed"));
        }
        let mut seen = cfg.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != cfg.seeds.len() {
            return Err(CliError::config("`seeds` contains duplicates"));
        }

        let source = self.source(command)?;
        let param_dim = match &source {
            Source::ClusteredLogistic { classes, .. } if *classes > 2 => cfg.d * classes,
            _ => cfg.d,
        };
        let geometry = self.registry.geometry(&cfg.geometry).map_err(core_config)?;
        let set = self.set(param_dim)?;
        geometry.check_set(&set).map_err(core_config)?;
        let phi1 = match &set {
            ConvexSet::Simplex { dim, .. } => Point::filled(*dim, 1.0 / *dim as f64),
            _ => Point::zeros(param_dim),
        };
        let center = Point::basis(param_dim, 0).scale(cfg.center_norm.unwrap_or(0.0));
        if let Some(c) = cfg.center_norm {
            nonnegative(c, "center_norm")?;
        }

        if cfg.variants.is_empty() {
            return Err(CliError::config("`variants` must list at least one variant"));
        }
        for v in &cfg.variants {
            self.registry.variant(v).map_err(core_config)?;
        }
        if cfg.variants.iter().enumerate().any(|(i, v)| cfg.variants[..i].contains(v)) {
            return Err(CliError::config("`variants` contains duplicates"));
        }
        self.registry.learner(&cfg.within).map_err(core_config)?;
        self.registry
            .meta(&cfg.meta, phi1.clone(), &geometry, &set)
            .map_err(core_config)?;

        let guess = self.guess()?;
        if command == Command::Adversary && guess == GuessPlan::Tuned {
            return Err(CliError::config("guess = \"tuned\" needs hindsight optima, which the adversary does not provide up front"));
        }
        let (tasks, ms, sweep) = self.grid(command, &source)?;

        let mut solver = SolverConfig::default();
        if let Some(t) = cfg.solver_tol {
            solver.tol = positive(t, "solver_tol")?;
        }
        if let Some(n) = cfg.solver_max_iters {
            solver.max_iters = n;
        }
        let mut oracle = OracleConfig::default();
        if let Some(t) = cfg.oracle_tol {
            oracle.tol = positive(t, "oracle_tol")?;
        }
        if let Some(t) = cfg.oracle_fail_tol {
            oracle.fail_tol = positive(t, "oracle_fail_tol")?;
        }
        if oracle.fail_tol < oracle.tol {
            return Err(CliError::config("`oracle_fail_tol` must be at least `oracle_tol`"));
        }
        if let Some(n) = cfg.oracle_max_iters {
            oracle.max_iters = n;
        }
        if let Some(g) = cfg.lipschitz_override {
            positive(g, "lipschitz_override")?;
        }

        let batch = match (cfg.batch_trials, cfg.batch_delta) {
            (None, None) => None,
            (Some(n), delta) => {
                if command != Command::Run {
                    return Err(CliError::config("`batch_trials` applies to the run command only"));
                }
                if !matches!(source, Source::Quadratic { .. }) {
                    return Err(CliError::config(
                        "`batch_trials` needs source = \"quadratic\", which can draw fresh tasks",
                    ));
                }
                if n == 0 {
                    return Err(CliError::config("`batch_trials` must be positive"));
                }
                let delta = need(delta, "batch_delta", "with batch_trials")?;
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(CliError::config("`batch_delta` must lie in (0, 1)"));
                }
                Some((n, delta))
            }
            (None, Some(_)) => return Err(CliError::config("`batch_delta` needs `batch_trials`")),
        };

        let qg = if command == Command::Qg { Some(self.qg(&set)?) } else { None };

        Ok(Plan {
            config: cfg.clone(),
            hash: cfg.hash(),
            set,
            phi1,
            center,
            source,
            guess,
            tasks,
            ms,
            sweep,
            solver,
            oracle,
            batch,
            qg,
        })
    }

    fn source(&self, command: Command) -> Result<Source> {
        let cfg = self.cfg;
        let source = match cfg.source.as_str() {
            "clustered_logistic" => Source::ClusteredLogistic {
                classes: need(cfg.classes, "classes", "for clustered_logistic")?,
                cluster_radius: nonnegative(
                    need(cfg.cluster_radius, "cluster_radius", "for clustered_logistic")?,
                    "cluster_radius",
                )?,
                feature_scale: positive(
                    need(cfg.feature_scale, "feature_scale", "for clustered_logistic")?,
                    "feature_scale",
                )?,
            },
            "quadratic" => Source::Quadratic {
                task_spread: nonnegative(need(cfg.task_spread, "task_spread", "for quadratic")?, "task_spread")?,
                sample_spread: nonnegative(
                    need(cfg.sample_spread, "sample_spread", "for quadratic")?,
                    "sample_spread",
                )?,
                scale: positive(need(cfg.scale, "scale", "for quadratic")?, "scale")?,
            },
            "csv" => Source::Csv {
                path: cfg
                    .csv_path
                    .clone()
                    .ok_or_else(|| CliError::config("missing key `csv_path` (required for csv)"))?,
                classes: cfg.classes,
                standardize: cfg.standardize.unwrap_or(false),
            },
            "adversary" => Source::Adversary {
                diameter: positive(need(cfg.diameter, "diameter", "for adversary")?, "diameter")?,
                lipschitz: positive(need(cfg.lipschitz, "lipschitz", "for adversary")?, "lipschitz")?,
            },
            other => {
                return Err(CliError::config(format!(
                    "unknown source `{other}` (known: clustered_logistic, quadratic, csv, adversary)"
                )))
            }
        };
        if let Source::ClusteredLogistic { classes, .. } = source {
            if classes < 2 {
                return Err(CliError::config("`classes` must be at least 2"));
            }
        }
        match (command, &source) {
            (Command::Adversary, Source::Adversary { .. }) => {
                if cfg.d < 3 {
                    return Err(CliError::config(format!("the adversary needs d ≥ 3, got {}", cfg.d)));
                }
            }
            (Command::Adversary, _) => {
                return Err(CliError::config("the adversary command needs source = \"adversary\""))
            }
            (_, Source::Adversary { .. }) => {
                return Err(CliError::config("source = \"adversary\" is run by the adversary command"))
            }
            (Command::Qg, Source::ClusteredLogistic { .. }) => {}
            (Command::Qg, _) => return Err(CliError::config("the qg command needs source = \"clustered_logistic\"")),
            _ => {}
        }
        Ok(source)
    }

    fn set(&self, dim: usize) -> Result<ConvexSet> {
        let cfg = self.cfg;
        match cfg.set.as_str() {
            "ball" => {
                let r = positive(need(cfg.radius, "radius", "for set = \"ball\"")?, "radius")?;
                ConvexSet::centered_ball(dim, r).map_err(core_config)
            }
            "simplex" => {
                let floor = nonnegative(need(cfg.simplex_floor, "simplex_floor", "for set = \"simplex\"")?, "simplex_floor")?;
                ConvexSet::simplex(dim, floor).map_err(core_config)
            }
            other => Err(CliError::config(format!("unknown set `{other}` (known: ball, simplex)"))),
        }
    }

    fn guess(&self) -> Result<GuessPlan> {
        let cfg = self.cfg;
        let plan = match cfg.guess.as_str() {
            "doubling" => {
                let epsilon = positive(need(cfg.epsilon, "epsilon", "for guess = \"doubling\"")?, "epsilon")?;
                let gamma = need(cfg.gamma, "gamma", "for guess = \"doubling\"")?;
                let known_similarity = cfg.known_similarity.unwrap_or(false);
                if !(gamma >= 1.0 && gamma.is_finite()) {
                    return Err(CliError::config(format!("`gamma` must be at least 1, got {gamma}")));
                }
                if gamma == 1.0 && !known_similarity {
                    return Err(CliError::config("gamma = 1 needs known_similarity = true"));
                }
                GuessPlan::Given(GuessConfig::Doubling {
                    epsilon,
                    gamma,
                    known_similarity,
                })
            }
            "fixed" => GuessPlan::Given(GuessConfig::Fixed {
                value: positive(need(cfg.similarity, "similarity", "for guess = \"fixed\"")?, "similarity")?,
            }),
            "tuned" => GuessPlan::Tuned,
            other => {
                return Err(CliError::config(format!(
                    "unknown guess `{other}` (known: doubling, fixed, tuned)"
                )))
            }
        };
        let stray = match plan {
            GuessPlan::Given(GuessConfig::Doubling { .. }) => cfg.similarity.map(|_| "similarity"),
            GuessPlan::Given(GuessConfig::Fixed { .. }) => cfg
                .epsilon
                .map(|_| "epsilon")
                .or(cfg.gamma.map(|_| "gamma")),
            GuessPlan::Tuned => cfg
                .epsilon
                .map(|_| "epsilon")
                .or(cfg.gamma.map(|_| "gamma"))
                .or(cfg.similarity.map(|_| "similarity")),
        };
        if let Some(key) = stray {
            return Err(CliError::config(format!("`{key}` does not apply to guess = \"{}\"", cfg.guess)));
        }
        Ok(plan)
    }

    fn grid(&self, command: Command, source: &Source) -> Result<(usize, Vec<usize>, bool)> {
        let cfg = self.cfg;
        if command == Command::Qg {
            return Ok((1, Vec::new(), false));
        }
        if let Source::Csv { .. } = source {
            if cfg.m.is_some() || cfg.m_sweep.is_some() || cfg.tasks.is_some() {
                return Err(CliError::config("csv sources take T and m from the file; remove `tasks`, `m` and `m_sweep`"));
            }
            return Ok((0, vec![0], false));
        }
        let tasks = need(cfg.tasks, "tasks", "for generated sources")?;
        if tasks == 0 {
            return Err(CliError::config("`tasks` must be at least 1"));
        }
        let (ms, sweep) = match (cfg.m, &cfg.m_sweep) {
            (Some(m), None) => (vec![m], false),
            (None, Some(sweep)) => {
                if sweep.is_empty() {
                    return Err(CliError::config("`m_sweep` must not be empty"));
                }
                (sweep.clone(), true)
            }
            (Some(_), Some(_)) => return Err(CliError::config("give either `m` or `m_sweep`, not both")),
            (None, None) => return Err(CliError::config("missing key `m` (or `m_sweep`)")),
        };
        if ms.contains(&0) {
            return Err(CliError::config("every m must be at least 1"));
        }
        if ms.iter().enumerate().any(|(i, m)| ms[..i].contains(m)) {
            return Err(CliError::config("`m_sweep` contains duplicates"));
        }
        if command == Command::Adversary && sweep {
            return Err(CliError::config("the adversary command takes a single `m`"));
        }
        if cfg.guess == "tuned" && tasks < 2 {
            return Err(CliError::config("guess = \"tuned\" needs at least two tasks"));
        }
        Ok((tasks, ms, sweep))
    }

    fn qg(&self, set: &ConvexSet) -> Result<QgPlan> {
        let cfg = self.cfg;
        let estimator = cfg
            .qg_estimator
            .clone()
            .ok_or_else(|| CliError::config("missing key `qg_estimator` (required for qg)"))?;
        self.registry.qg(&estimator, 0).map_err(core_config)?;
        let ConvexSet::Ball { radius, center } = set else {
            return Err(CliError::config("the qg command needs set = \"ball\""));
        };
        if center.norm() != 0.0 {
            return Err(CliError::config("the qg command needs a ball centered at the origin"));
        }
        let deltas = cfg
            .qg_deltas
            .clone()
            .ok_or_else(|| CliError::config("missing key `qg_deltas` (required for qg)"))?;
        if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0 && *d < 2.0 * radius)) {
            return Err(CliError::config("`qg_deltas` must be nonempty with every δ in (0, 2·radius)"));
        }
        let ms = cfg
            .qg_m
            .clone()
            .ok_or_else(|| CliError::config("missing key `qg_m` (required for qg)"))?;
        if ms.len() < 2 || ms.contains(&0) {
            return Err(CliError::config("`qg_m` needs at least two positive sample sizes"));
        }
        let mut fw = FwConfig::default();
        if let Some(n) = cfg.fw_max_iters {
            fw.max_iters = n;
        }
        if let Some(t) = cfg.fw_gap_tol {
            fw.gap_tol = positive(t, "fw_gap_tol")?;
        }
        Ok(QgPlan {
            estimator,
            deltas,
            ms,
            fw,
        })
    }
}
