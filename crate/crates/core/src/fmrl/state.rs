use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{BregmanGeometry, ConvexSet, MEMBERSHIP_TOL};
use crate::meta::MetaLearner;
use crate::point::Point;
use crate::tasks::{hindsight_oracle, OracleConfig, OracleResult, OracleStatus, TaskSequence};
use crate::within_task::{run_within_task, LossStream, PlayContext, SolverConfig, WithinTaskLearner, WithinTaskRun};

use super::guess::{effective_lipschitz, GuessConfig, SimilarityGuess};
use super::ledger::{RegretLedger, TaskRecord};
use super::variant::{MetaMode, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmrlConfig {
    pub guess: GuessConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

/// The lifelong learner between tasks.
#[derive(Debug)]
pub struct MetaLearnerState {
    phi: Point,
    guess: SimilarityGuess,
    variant: Arc<dyn Variant>,
    meta: Box<dyn MetaLearner>,
    within: Arc<dyn WithinTaskLearner>,
    geometry: BregmanGeometry,
    set: ConvexSet,
    solver: SolverConfig,
    oracle: OracleConfig,
    t: usize,
}

impl MetaLearnerState {
    /// Starts at `meta.current()` with `D₁ = max_θ √B_R(θ‖φ₁) + ε` under the
    /// doubling rule.
    pub fn init(
        cfg: &FmrlConfig,
        variant: Arc<dyn Variant>,
        meta: Box<dyn MetaLearner>,
        within: Arc<dyn WithinTaskLearner>,
        geometry: BregmanGeometry,
        set: ConvexSet,
    ) -> Result<Self> {
        geometry.check_set(&set)?;
        let phi = meta.current().clone();
        check_dim(set.dim(), phi.dim())?;
        if !set.contains(&phi, MEMBERSHIP_TOL) {
            return Err(Error::invalid("the initialization must lie in the action space"));
        }
        let max_divergence = geometry.max_divergence(&set, &phi)?;
        let guess = SimilarityGuess::from_config(&cfg.guess, max_divergence)?;
        Ok(MetaLearnerState {
            phi,
            guess,
            variant,
            meta,
            within,
            geometry,
            set,
            solver: cfg.solver,
            oracle: cfg.oracle,
            t: 0,
        })
    }

    pub fn phi(&self) -> &Point {
        &self.phi
    }

    pub fn guess(&self) -> &SimilarityGuess {
        &self.guess
    }

    pub fn variant(&self) -> &dyn Variant {
        self.variant.as_ref()
    }

    pub fn meta(&self) -> &dyn MetaLearner {
        self.meta.as_ref()
    }

    pub fn within(&self) -> &dyn WithinTaskLearner {
        self.within.as_ref()
    }

    pub fn geometry(&self) -> &BregmanGeometry {
        &self.geometry
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    pub fn solver(&self) -> &SolverConfig {
        &self.solver
    }

    pub fn oracle(&self) -> &OracleConfig {
        &self.oracle
    }

    /// Tasks completed so far.
    pub fn tasks_seen(&self) -> usize {
        self.t
    }

    /// Step size `D_t/(G_t√m_t)` for a task with the given bound and length.
    pub fn eta_for(&self, lipschitz: f64, m: usize) -> f64 {
        self.guess.current() / (effective_lipschitz(lipschitz) * (m as f64).sqrt())
    }

    /// Runs one task and applies the meta-update. `hindsight` may carry the
    /// task's oracle result when it is already known.
    pub fn meta_step(&mut self, stream: &mut dyn LossStream, hindsight: Option<&OracleResult>) -> Result<TaskRecord> {
        let m = stream.rounds();
        if m == 0 {
            return Err(Error::Empty("task has no losses"));
        }
        let g = effective_lipschitz(stream.lipschitz());
        let sigma = g * (m as f64).sqrt();
        let d_t = self.guess.current();
        let eta = d_t / sigma;
        let k_before = self.guess.k();

        let run = self.run_task(stream, eta)?;
        let oracle = match hindsight {
            Some(h) => h.clone(),
            None => hindsight_oracle(&run.losses, &self.set, &self.oracle)?,
        };

        let skip = oracle.status == OracleStatus::Failed && self.variant.uses_hindsight();
        let update_vector = self.variant.update_vector(&run, &oracle.point)?;
        let root_divergence = if skip {
            f64::NAN
        } else {
            self.geometry.divergence(&update_vector, &self.phi)?.max(0.0).sqrt()
        };
        let violated = self.guess.observe(root_divergence);

        let phi_t = self.phi.clone();
        if !skip {
            self.phi = match self.variant.meta_mode() {
                MetaMode::Learned => self.meta.update(&update_vector, sigma)?,
                MetaMode::Replace => self.set.project(&update_vector),
                MetaMode::Frozen => self.phi.clone(),
            };
        }
        self.t += 1;

        Ok(TaskRecord {
            t: self.t,
            m,
            lipschitz: stream.lipschitz(),
            agent_loss: run.agent_loss,
            comparator_loss: oracle.value,
            regret: run.agent_loss - oracle.value,
            d_t,
            eta_t: eta,
            k_before,
            violated,
            root_divergence,
            sigma,
            phi: phi_t,
            update_vector,
            hindsight: oracle.point,
            oracle_status: oracle.status,
            oracle_residual: oracle.residual,
            unconverged_plays: run.unconverged_plays,
            meta_updated: !skip,
        })
    }

    fn run_task(&self, stream: &mut dyn LossStream, eta: f64) -> Result<WithinTaskRun> {
        let ctx = PlayContext {
            geometry: &self.geometry,
            set: &self.set,
            phi: &self.phi,
            eta,
            solver: &self.solver,
        };
        run_within_task(self.within.as_ref(), &ctx, stream, self.variant.needs_final_play())
    }

    pub fn empty_ledger(&self) -> RegretLedger {
        RegretLedger::new(self.guess.epsilon(), self.guess.gamma(), self.guess.is_doubling())
    }
}

/// Runs every task in order. `hindsight`, when given, holds one oracle result
/// per task.
pub fn run_lifelong(
    state: &mut MetaLearnerState,
    tasks: &[TaskSequence],
    hindsight: Option<&[OracleResult]>,
) -> Result<RegretLedger> {
    if let Some(h) = hindsight {
        if h.len() != tasks.len() {
            return Err(Error::invalid(format!(
                "{} hindsight results for {} tasks",
                h.len(),
                tasks.len()
            )));
        }
    }
    let mut ledger = state.empty_ledger();
    for (i, task) in tasks.iter().enumerate() {
        check_dim(state.set().dim(), task.param_dim())?;
        let record = state.meta_step(&mut task.stream(), hindsight.map(|h| &h[i]))?;
        ledger.records.push(record);
    }
    Ok(ledger)
}

/// Runs lifelong learning against freshly created streams, such as adaptive
/// adversaries.
pub fn run_lifelong_streams<S: LossStream>(
    state: &mut MetaLearnerState,
    streams: impl IntoIterator<Item = S>,
) -> Result<RegretLedger> {
    let mut ledger = state.empty_ledger();
    for mut s in streams {
        ledger.records.push(state.meta_step(&mut s, None)?);
    }
    Ok(ledger)
}
