//! The single-task loop: play, observe the loss, repeat.

use crate::error::{check_dim, Error, Result};
use crate::point::Point;

use super::learner::{History, Play, PlayContext, WithinTaskLearner};
use super::loss::LossFn;

/// A source of per-round losses. Adaptive sources may look at the action
/// before choosing the loss.
pub trait LossStream {
    fn rounds(&self) -> usize;

    /// Per-task Lipschitz bound `G_t`.
    fn lipschitz(&self) -> f64;

    fn next_loss(&mut self, action: &Point) -> Result<LossFn>;
}

/// Replays a fixed list of losses.
#[derive(Debug, Clone)]
pub struct StaticStream<'a> {
    losses: &'a [LossFn],
    lipschitz: f64,
    next: usize,
}

impl<'a> StaticStream<'a> {
    pub fn new(losses: &'a [LossFn], lipschitz: f64) -> Self {
        StaticStream {
            losses,
            lipschitz,
            next: 0,
        }
    }
}

impl LossStream for StaticStream<'_> {
    fn rounds(&self) -> usize {
        self.losses.len()
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn next_loss(&mut self, _action: &Point) -> Result<LossFn> {
        let loss = self
            .losses
            .get(self.next)
            .cloned()
            .ok_or(Error::Empty("static stream exhausted"))?;
        self.next += 1;
        Ok(loss)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WithinTaskRun {
    pub actions: Vec<Point>,
    pub gradients: Vec<Point>,
    pub losses: Vec<LossFn>,
    /// `Σ_i ℓ_i(θ_i)`
    pub agent_loss: f64,
    pub last_iterate: Point,
    pub average_iterate: Point,
    /// The play after all losses were seen, when requested.
    pub final_play: Option<Play>,
    pub unconverged_plays: usize,
    pub max_residual: f64,
}

impl WithinTaskRun {
    pub fn rounds(&self) -> usize {
        self.actions.len()
    }
}

/// Plays every round of `stream` from `ctx.phi`. The first action is `φ`
/// itself; each later action sees only the losses revealed before it.
pub fn run_within_task(
    learner: &dyn WithinTaskLearner,
    ctx: &PlayContext<'_>,
    stream: &mut dyn LossStream,
    with_final_play: bool,
) -> Result<WithinTaskRun> {
    let m = stream.rounds();
    if m == 0 {
        return Err(Error::Empty("task has no losses"));
    }
    let d = ctx.set.dim();
    check_dim(d, ctx.phi.dim())?;

    let mut actions = Vec::with_capacity(m);
    let mut gradients = Vec::with_capacity(m);
    let mut losses = Vec::with_capacity(m);
    let mut cumulative = Point::zeros(d);
    let mut agent_loss = 0.0;
    let mut unconverged = 0;
    let mut max_residual: f64 = 0.0;

    let mut action = ctx.phi.clone();
    for i in 0..m {
        if i > 0 {
            let play = learner.play(
                ctx,
                &History {
                    losses: &losses,
                    cumulative_gradient: &cumulative,
                    warm_start: actions.last(),
                },
            )?;
            if !play.converged {
                unconverged += 1;
            }
            max_residual = max_residual.max(play.residual);
            action = play.point;
        }
        let loss = stream.next_loss(&action)?;
        check_dim(d, loss.param_dim())?;
        let g = loss.subgradient(&action);
        agent_loss += loss.value(&action);
        cumulative.axpy(1.0, &g);
        actions.push(action.clone());
        gradients.push(g);
        losses.push(loss);
    }

    let final_play = if with_final_play {
        let play = learner.play(
            ctx,
            &History {
                losses: &losses,
                cumulative_gradient: &cumulative,
                warm_start: actions.last(),
            },
        )?;
        if !play.converged {
            unconverged += 1;
        }
        max_residual = max_residual.max(play.residual);
        Some(play)
    } else {
        None
    };

    let average_iterate = Point::mean(&actions).expect("at least one round");
    Ok(WithinTaskRun {
        last_iterate: actions.last().cloned().expect("at least one round"),
        average_iterate,
        actions,
        gradients,
        losses,
        agent_loss,
        final_play,
        unconverged_plays: unconverged,
        max_residual,
    })
}
