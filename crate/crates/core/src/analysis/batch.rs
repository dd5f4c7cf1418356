//! Online-to-batch conversion of a lifelong run's states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmrl::RegretLedger;
use crate::geometry::{BregmanGeometry, ConvexSet};
use crate::tasks::{hindsight_oracle, MetaDistribution, OracleConfig, TaskSequence};
use crate::within_task::{run_within_task, total_loss, PlayContext, SolverConfig, WithinTaskLearner};

/// Held-out losses drawn per trial, as a multiple of `m`.
pub const HELD_OUT_FACTOR: usize = 10;

#[derive(Debug, Clone, Copy)]
pub struct BatchContext<'a> {
    pub geometry: &'a BregmanGeometry,
    pub set: &'a ConvexSet,
    pub within: &'a dyn WithinTaskLearner,
    pub solver: &'a SolverConfig,
    pub oracle: &'a OracleConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchEstimate {
    /// Mean held-out risk of the averaged iterate.
    pub risk: f64,
    /// Mean held-out risk of each trial task's best fixed action.
    pub comparator_risk: f64,
    pub gap: f64,
    pub trials: usize,
}

/// For each trial: pick a recorded state `(φ_t, D_t)` uniformly, draw a new
/// task from `meta` and `m` losses from it, run the within-task learner from
/// that state, and score the average iterate on `10·m` held-out losses
/// against the held-out hindsight optimum.
pub fn online_to_batch_eval(
    ledger: &RegretLedger,
    ctx: &BatchContext<'_>,
    meta: &dyn MetaDistribution,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<BatchEstimate> {
    if ledger.is_empty() {
        return Err(Error::Empty("online-to-batch conversion needs recorded states"));
    }
    if m == 0 || trials == 0 {
        return Err(Error::invalid("m and the number of trials must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut risk = 0.0;
    let mut comparator = 0.0;
    for _ in 0..trials {
        let record = &ledger.records[rng.random_range(0..ledger.len())];
        let task = meta.sample_task(&mut rng)?;
        let train = TaskSequence::new(task.sample_losses(m, &mut rng)?)?;
        let held_out = task.sample_losses(HELD_OUT_FACTOR * m, &mut rng)?;

        let g = if train.lipschitz() > 0.0 { train.lipschitz() } else { 1.0 };
        let eta = record.d_t / (g * (m as f64).sqrt());
        let play = PlayContext {
            geometry: ctx.geometry,
            set: ctx.set,
            phi: &record.phi,
            eta,
            solver: ctx.solver,
        };
        let run = run_within_task(ctx.within, &play, &mut train.stream(), false)?;
        let n = held_out.len() as f64;
        risk += total_loss(&held_out, &run.average_iterate) / n;
        let best = hindsight_oracle(&held_out, ctx.set, ctx.oracle)?;
        comparator += best.value / n;
    }
    let trials_f = trials as f64;
    Ok(BatchEstimate {
        risk: risk / trials_f,
        comparator_risk: comparator / trials_f,
        gap: (risk - comparator) / trials_f,
        trials,
    })
}

/// `R̄/m + √(8 ln(1/δ)/T)`
pub fn conversion_bound(tar: f64, m: usize, t: usize, delta: f64) -> f64 {
    tar / m as f64 + (8.0 * (1.0 / delta).ln() / t as f64).sqrt()
}
