//! The `run` and `adversary` commands: a grid of lifelong runs over
//! variants × m × seeds.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use fmrl_core::analysis::{
    hull_constant, hull_lipschitz, online_to_batch_eval, tar_bound_envelope, task_diameter, BatchContext,
    EnvelopeInputs,
};
use fmrl_core::fmrl::{run_lifelong, run_lifelong_streams, FmrlConfig, GuessConfig, MetaLearnerState, RegretLedger};
use fmrl_core::geometry::BregmanGeometry;
use fmrl_core::registry::Registry;
use fmrl_core::tasks::{
    gen_clustered_logistic, hindsight_oracle, load_csv_tasks, sample_task_stream, AdversaryStream,
    ClusteredLogistic, CsvSchema, MetaDistribution, OracleResult, QuadraticMeta, TaskSequence,
};
use fmrl_core::Point;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, GuessPlan, Plan, Source};
use crate::error::{CliError, Result};
use crate::output::{fmt17, ledger_csv, ledger_rows, write, write_json, LedgerRow, F17};

/// Held-out online-to-batch result of one cell.
#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub trials: usize,
    pub risk: F17,
    pub comparator_risk: F17,
    pub gap: F17,
    /// `R̄/m + 3·√(8 ln(1/δ)/T)`
    pub bound: F17,
    pub within_bound: bool,
}

/// One (variant, m, seed) lifelong run.
#[derive(Debug, Clone)]
pub struct Cell {
    pub variant: String,
    pub m: usize,
    pub seed: u64,
    pub ledger: RegretLedger,
    pub d_star: f64,
    pub envelope: Option<f64>,
    /// `(G D*/4)√m` for adversary runs.
    pub lower_bound: Option<f64>,
    pub batch: Option<BatchSummary>,
    pub seconds: f64,
}

impl Cell {
    pub fn id(&self) -> String {
        format!("{}_m{}_s{}", self.variant, self.m, self.seed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub variant: String,
    pub m: usize,
    pub seed: u64,
    pub tasks: usize,
    pub tar: F17,
    pub envelope: Option<F17>,
    pub lower_bound: Option<F17>,
    pub d_star: F17,
    pub epsilon: F17,
    pub gamma: F17,
    pub violations: usize,
    pub violation_bound: Option<usize>,
    pub excluded: usize,
    /// `ok`, or the first bookkeeping inconsistency found.
    pub doubling_check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch: Option<BatchSummary>,
    pub ledger: Vec<LedgerRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub command: &'static str,
    pub config_hash: String,
    pub sweep: bool,
    pub cells: Vec<CellSummary>,
}

impl From<&Cell> for CellSummary {
    fn from(c: &Cell) -> Self {
        CellSummary {
            variant: c.variant.clone(),
            m: c.m,
            seed: c.seed,
            tasks: c.ledger.len(),
            tar: F17(c.ledger.tar()),
            envelope: c.envelope.map(F17),
            lower_bound: c.lower_bound.map(F17),
            d_star: F17(c.d_star),
            epsilon: F17(c.ledger.epsilon),
            gamma: F17(c.ledger.gamma),
            violations: c.ledger.violations(),
            violation_bound: c.ledger.violation_bound(),
            excluded: c.ledger.excluded(),
            doubling_check: match c.ledger.check_doubling() {
                Ok(()) => "ok".into(),
                Err(e) => e,
            },
            batch: c.batch.clone(),
            ledger: ledger_rows(&c.ledger),
        }
    }
}

/// The tasks of one (m, seed) pair, shared by every variant.
struct Stream {
    tasks: Vec<TaskSequence>,
    hindsight: Vec<OracleResult>,
    meta: Option<Arc<dyn MetaDistribution>>,
}

struct Runner<'a> {
    plan: &'a Plan,
    registry: &'a Registry,
    geometry: BregmanGeometry,
    csv: Option<Vec<TaskSequence>>,
}

impl<'a> Runner<'a> {
    fn new(plan: &'a Plan, registry: &'a Registry, base: &Path) -> Result<Self> {
        let geometry = registry.geometry(&plan.config.geometry)?;
        let csv = match &plan.source {
            Source::Csv {
                path,
                classes,
                standardize,
            } => {
                let path = resolve(base, path);
                let schema = CsvSchema {
                    classes: *classes,
                    standardize: *standardize,
                };
                let tasks = load_csv_tasks(&path, &schema)
                    .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
                if tasks.is_empty() {
                    return Err(CliError::config(format!("{}: no tasks", path.display())));
                }
                if tasks[0].param_dim() != plan.set.dim() {
                    return Err(CliError::config(format!(
                        "{}: tasks have dimension {} but the set has {}",
                        path.display(),
                        tasks[0].param_dim(),
                        plan.set.dim()
                    )));
                }
                Some(tasks)
            }
            _ => None,
        };
        Ok(Runner {
            plan,
            registry,
            geometry,
            csv,
        })
    }

    fn stream(&self, m: usize, seed: u64) -> Result<Stream> {
        let plan = self.plan;
        let (mut tasks, meta): (Vec<TaskSequence>, Option<Arc<dyn MetaDistribution>>) = match &plan.source {
            Source::ClusteredLogistic {
                classes,
                cluster_radius,
                feature_scale,
            } => {
                let spec = ClusteredLogistic {
                    d: plan.config.d,
                    classes: *classes,
                    m,
                    tasks: plan.tasks,
                    center: plan.center.clone(),
                    cluster_radius: *cluster_radius,
                    feature_scale: *feature_scale,
                    seed,
                };
                (gen_clustered_logistic(&spec)?, None)
            }
            Source::Quadratic {
                task_spread,
                sample_spread,
                scale,
            } => {
                let meta = Arc::new(QuadraticMeta {
                    center: plan.center.clone(),
                    task_spread: *task_spread,
                    sample_spread: *sample_spread,
                    scale: *scale,
                    set: plan.set.clone(),
                });
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (sample_task_stream(meta.as_ref(), plan.tasks, m, &mut rng)?, Some(meta as Arc<dyn MetaDistribution>))
            }
            Source::Csv { .. } => (self.csv.clone().expect("csv tasks are loaded up front"), None),
            Source::Adversary { .. } => unreachable!("adversary streams are adaptive"),
        };
        if let Some(g) = plan.config.lipschitz_override {
            tasks = tasks
                .into_iter()
                .map(|t| {
                    let g = g.max(t.lipschitz());
                    t.with_lipschitz(g)
                })
                .collect::<fmrl_core::Result<_>>()?;
        }
        let hindsight = tasks
            .iter()
            .map(|t| hindsight_oracle(t.losses(), &plan.set, &plan.oracle))
            .collect::<fmrl_core::Result<Vec<_>>>()?;
        Ok(Stream { tasks, hindsight, meta })
    }

    fn state(&self, variant: &str, guess: GuessConfig) -> Result<MetaLearnerState> {
        let plan = self.plan;
        let cfg = FmrlConfig {
            guess,
            solver: plan.solver,
            oracle: plan.oracle,
        };
        Ok(MetaLearnerState::init(
            &cfg,
            self.registry.variant(variant)?,
            self.registry
                .meta(&plan.config.meta, plan.phi1.clone(), &self.geometry, &plan.set)?,
            self.registry.learner(&plan.config.within)?,
            self.geometry.clone(),
            plan.set.clone(),
        )?)
    }

    /// `(D*, envelope inputs)` of a stream, when the envelope is defined.
    fn envelope_inputs(&self, stream: &Stream, seed: u64) -> Result<(f64, Option<EnvelopeInputs>)> {
        let pts: Vec<Point> = stream.hindsight.iter().map(|h| h.point.clone()).collect();
        let d_star = task_diameter(&self.geometry, &pts)?;
        let t = stream.tasks.len();
        if !(d_star > 0.0) || t < 2 {
            return Ok((d_star, None));
        }
        let mut hull = pts;
        hull.push(self.plan.phi1.clone());
        let c = hull_constant(hull_lipschitz(&self.geometry, &hull, 2 * t, seed)?);
        let max_div = self.geometry.max_divergence(&self.plan.set, &self.plan.phi1)?;
        let g = stream.tasks.iter().map(|x| x.lipschitz()).fold(0.0, f64::max);
        let m = stream.tasks.iter().map(|x| x.rounds()).max().unwrap_or(1);
        let inputs = EnvelopeInputs {
            d: d_star.max(max_div.sqrt()),
            d_star,
            c,
            g: if g > 0.0 { g } else { 1.0 },
            m: m as f64,
            t: t as f64,
        };
        Ok((d_star, Some(inputs)))
    }

    fn run_pair(&self, m: usize, seed: u64) -> Result<Vec<Cell>> {
        let plan = self.plan;
        let stream = self.stream(m, seed)?;
        let (d_star, inputs) = self.envelope_inputs(&stream, seed)?;
        let envelope = inputs.as_ref().map(tar_bound_envelope).transpose()?;
        let guess = match plan.guess {
            GuessPlan::Given(g) => g,
            GuessPlan::Tuned => {
                let inputs = inputs.ok_or_else(|| {
                    CliError::Runtime(format!(
                        "m = {m}, seed = {seed}: guess = \"tuned\" needs T ≥ 2 and a positive task diameter"
                    ))
                })?;
                let (epsilon, gamma) = inputs.tuned_guess();
                GuessConfig::Doubling {
                    epsilon,
                    gamma,
                    known_similarity: false,
                }
            }
        };
        let mut cells = Vec::with_capacity(plan.config.variants.len());
        for variant in &plan.config.variants {
            let start = Instant::now();
            let mut state = self.state(variant, guess)?;
            let ledger = run_lifelong(&mut state, &stream.tasks, Some(&stream.hindsight))?;
            let batch = match (plan.batch, &stream.meta) {
                (Some((trials, delta)), Some(meta)) => Some(self.batch(&ledger, meta.as_ref(), m, trials, delta, seed)?),
                _ => None,
            };
            cells.push(Cell {
                variant: variant.clone(),
                m: stream.tasks.first().map_or(m, |t| t.rounds()),
                seed,
                ledger,
                d_star,
                envelope,
                lower_bound: None,
                batch,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
        Ok(cells)
    }

    fn batch(
        &self,
        ledger: &RegretLedger,
        meta: &dyn MetaDistribution,
        m: usize,
        trials: usize,
        delta: f64,
        seed: u64,
    ) -> Result<BatchSummary> {
        let within = self.registry.learner(&self.plan.config.within)?;
        let ctx = BatchContext {
            geometry: &self.geometry,
            set: &self.plan.set,
            within: within.as_ref(),
            solver: &self.plan.solver,
            oracle: &self.plan.oracle,
        };
        // A separate stream keeps the evaluation draws independent of training.
        let est = online_to_batch_eval(ledger, &ctx, meta, m, trials, seed ^ 0x5eed_0ba7_c4e5_0001)?;
        let t = ledger.len() as f64;
        let bound = ledger.tar() / m as f64 + 3.0 * (8.0 * (1.0 / delta).ln() / t).sqrt();
        Ok(BatchSummary {
            trials: est.trials,
            risk: F17(est.risk),
            comparator_risk: F17(est.comparator_risk),
            gap: F17(est.gap),
            bound: F17(bound),
            within_bound: est.gap <= bound,
        })
    }

    fn run_adversary(&self, variant: &str, seed: u64) -> Result<Cell> {
        let plan = self.plan;
        let Source::Adversary { diameter, lipschitz } = plan.source else {
            unreachable!("validated");
        };
        let GuessPlan::Given(guess) = plan.guess else {
            return Err(CliError::config("the adversary command needs guess = \"doubling\" or \"fixed\""));
        };
        let m = plan.ms[0];
        let start = Instant::now();
        let mut state = self.state(variant, guess)?;
        let streams = (0..plan.tasks)
            .map(|_| AdversaryStream::new(plan.center.clone(), diameter, lipschitz, m))
            .collect::<fmrl_core::Result<Vec<_>>>()?;
        let ledger = run_lifelong_streams(&mut state, streams)?;
        Ok(Cell {
            variant: variant.to_string(),
            m,
            seed,
            ledger,
            d_star: diameter,
            envelope: None,
            lower_bound: Some(lipschitz * diameter / 4.0 * (m as f64).sqrt()),
            batch: None,
            seconds: start.elapsed().as_secs_f64(),
        })
    }
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// Runs every cell of the plan. `base` resolves relative data paths.
pub fn run_cells(plan: &Plan, registry: &Registry, command: Command, base: &Path) -> Result<Vec<Cell>> {
    let runner = Runner::new(plan, registry, base)?;
    match command {
        Command::Run => {
            let pairs: Vec<(usize, u64)> = plan
                .ms
                .iter()
                .flat_map(|&m| plan.config.seeds.iter().map(move |&s| (m, s)))
                .collect();
            let nested = pairs
                .par_iter()
                .map(|&(m, seed)| runner.run_pair(m, seed))
                .collect::<Result<Vec<_>>>()?;
            Ok(nested.into_iter().flatten().collect())
        }
        Command::Adversary => {
            let jobs: Vec<(&String, u64)> = plan
                .config
                .seeds
                .iter()
                .flat_map(|&s| plan.config.variants.iter().map(move |v| (v, s)))
                .collect();
            jobs.par_iter().map(|&(v, s)| runner.run_adversary(v, s)).collect()
        }
        Command::Qg => unreachable!("qg has its own driver"),
    }
}

#[derive(Serialize)]
struct Timing {
    total_seconds: f64,
    cells: Vec<CellTiming>,
}

#[derive(Serialize)]
struct CellTiming {
    id: String,
    seconds: f64,
}

/// Writes `ledger.csv` (or one per cell), `summary.json`, `timing.json` and,
/// for sweeps, `tar_vs_m.csv`.
pub fn write_artifacts(plan: &Plan, command: Command, cells: &[Cell], out: &Path, seconds: f64) -> Result<RunSummary> {
    if let [cell] = cells {
        write(&out.join("ledger.csv"), ledger_csv(&cell.ledger))?;
    } else {
        for cell in cells {
            write(&out.join("cells").join(cell.id()).join("ledger.csv"), ledger_csv(&cell.ledger))?;
        }
    }
    if plan.sweep {
        let mut csv = String::from("variant,m,seed,TAR\n");
        for c in cells {
            csv.push_str(&format!("{},{},{},{}\n", c.variant, c.m, c.seed, fmt17(c.ledger.tar())));
        }
        write(&out.join("tar_vs_m.csv"), csv)?;
    }
    let summary = RunSummary {
        name: plan.config.name.clone(),
        command: match command {
            Command::Run => "run",
            Command::Adversary => "adversary",
            Command::Qg => "qg",
        },
        config_hash: plan.hash.clone(),
        sweep: plan.sweep,
        cells: cells.iter().map(CellSummary::from).collect(),
    };
    write_json(&out.join("summary.json"), &summary)?;
    let timing = Timing {
        total_seconds: seconds,
        cells: cells
            .iter()
            .map(|c| CellTiming {
                id: c.id(),
                seconds: c.seconds,
            })
            .collect(),
    };
    write_json(&out.join("timing.json"), &timing)?;
    Ok(summary)
}
