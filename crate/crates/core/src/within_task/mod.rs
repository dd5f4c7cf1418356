//! Within-task online learners and the single-task run loop.

mod learner;
mod loss;
mod run;
mod solver;

pub use learner::{ftrl_play, omd_play, Ftrl, History, Omd, Play, PlayContext, WithinTaskLearner};
pub use loss::{total_gradient, total_loss, LossFn, LossKind, LossSum};
pub use run::{run_within_task, LossStream, StaticStream, WithinTaskRun};
pub use solver::{gradient_mapping_norm, projected_gradient, Objective, SolveReport, SolverConfig};
