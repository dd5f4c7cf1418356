//! Online-within-online meta-learning.
//!
//! A lifelong learner runs a within-task online algorithm (FTRL or lazy OMD)
//! from an initialization `phi_t`, then moves `phi_t` with a meta-update
//! (follow-the-leader or adaptive OGD) on Bregman-divergence losses toward the
//! task's update vector. The step size of each task is tuned from a
//! task-similarity guess that grows geometrically whenever it is violated.
//!
//! Every interchangeable piece (geometry, within-task learner, meta-learner,
//! meta-update variant, quadratic-growth estimator) sits behind a trait and is
//! registered by name in [`registry::Registry`], so experiment configs can
//! select them at runtime.

pub mod analysis;
pub mod error;
pub mod fmrl;
pub mod geometry;
pub mod meta;
pub mod point;
pub mod registry;
pub mod tasks;
pub mod within_task;

pub use error::{Error, Result};
pub use point::Point;
