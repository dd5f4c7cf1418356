//! Choices of the vector each task contributes to the meta-update.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::point::Point;
use crate::within_task::WithinTaskRun;

/// What the meta-learner does with the update vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetaMode {
    /// Feed it to the meta-learner.
    Learned,
    /// Use it directly as the next initialization.
    Replace,
    /// Keep the first initialization forever.
    Frozen,
}

pub trait Variant: Send + Sync + Debug {
    fn name(&self) -> &'static str;

    /// Whether the run must include the play after the last loss.
    fn needs_final_play(&self) -> bool {
        false
    }

    /// Whether the update vector is the hindsight optimum, which makes it
    /// unusable when the oracle fails.
    fn uses_hindsight(&self) -> bool {
        false
    }

    fn meta_mode(&self) -> MetaMode {
        MetaMode::Learned
    }

    fn update_vector(&self, run: &WithinTaskRun, hindsight: &Point) -> Result<Point>;
}

/// Update toward the task's best fixed action in hindsight.
#[derive(Debug, Clone, Copy, Default)]
pub struct Fal;

/// Update toward the within-task learner's play after all losses.
#[derive(Debug, Clone, Copy, Default)]
pub struct FliOnline;

/// Update toward the average within-task iterate.
#[derive(Debug, Clone, Copy, Default)]
pub struct FliBatch;

/// Start each task at the previous task's hindsight optimum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Strawman;

/// Never move the initialization.
#[derive(Debug, Clone, Copy, Default)]
pub struct SingleTask;

impl Variant for Fal {
    fn name(&self) -> &'static str {
        "fal"
    }

    fn uses_hindsight(&self) -> bool {
        true
    }

    fn update_vector(&self, _run: &WithinTaskRun, hindsight: &Point) -> Result<Point> {
        Ok(hindsight.clone())
    }
}

impl Variant for FliOnline {
    fn name(&self) -> &'static str {
        "fli-online"
    }

    fn needs_final_play(&self) -> bool {
        true
    }

    fn update_vector(&self, run: &WithinTaskRun, _hindsight: &Point) -> Result<Point> {
        run.final_play
            .as_ref()
            .map(|p| p.point.clone())
            .ok_or_else(|| Error::invalid("the run carries no final play"))
    }
}

impl Variant for FliBatch {
    fn name(&self) -> &'static str {
        "fli-batch"
    }

    fn update_vector(&self, run: &WithinTaskRun, _hindsight: &Point) -> Result<Point> {
        Ok(run.average_iterate.clone())
    }
}

impl Variant for Strawman {
    fn name(&self) -> &'static str {
        "strawman"
    }

    fn uses_hindsight(&self) -> bool {
        true
    }

    fn meta_mode(&self) -> MetaMode {
        MetaMode::Replace
    }

    fn update_vector(&self, _run: &WithinTaskRun, hindsight: &Point) -> Result<Point> {
        Ok(hindsight.clone())
    }
}

impl Variant for SingleTask {
    fn name(&self) -> &'static str {
        "single-task"
    }

    fn uses_hindsight(&self) -> bool {
        true
    }

    fn meta_mode(&self) -> MetaMode {
        MetaMode::Frozen
    }

    fn update_vector(&self, _run: &WithinTaskRun, hindsight: &Point) -> Result<Point> {
        Ok(hindsight.clone())
    }
}
