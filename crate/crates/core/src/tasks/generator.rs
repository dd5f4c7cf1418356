//! Synthetic task streams whose per-task optima cluster around a center.

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::ConvexSet;
use crate::point::Point;
use crate::within_task::LossFn;

use super::sequence::{MetaDistribution, TaskDistribution, TaskSequence};

/// Uniform draw from the unit sphere in `dim` dimensions.
pub fn unit_sphere(dim: usize, rng: &mut dyn RngCore) -> Point {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let p = Point::new(g);
        let n = p.norm();
        if n > 1e-300 {
            return p.scale(1.0 / n);
        }
    }
}

/// Uniform draw from the unit ball in `dim` dimensions.
pub fn unit_ball(dim: usize, rng: &mut dyn RngCore) -> Point {
    let dir = unit_sphere(dim, rng);
    let r: f64 = rng.random::<f64>().powf(1.0 / dim as f64);
    dir.scale(r)
}

/// Parameters of [`gen_clustered_logistic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteredLogistic {
    /// Feature dimension.
    pub d: usize,
    pub classes: usize,
    /// Losses per task.
    pub m: usize,
    /// Number of tasks.
    pub tasks: usize,
    /// Cluster center in parameter space (dimension `d` for two classes, `d·classes` otherwise).
    pub center: Point,
    pub cluster_radius: f64,
    pub feature_scale: f64,
    pub seed: u64,
}

impl ClusteredLogistic {
    pub fn param_dim(&self) -> usize {
        if self.classes == 2 {
            self.d
        } else {
            self.d * self.classes
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 || self.classes < 2 || self.m == 0 {
            return Err(Error::invalid("need d ≥ 1, classes ≥ 2 and m ≥ 1"));
        }
        check_dim(self.param_dim(), self.center.dim())?;
        if !(self.cluster_radius >= 0.0) || !(self.feature_scale > 0.0) {
            return Err(Error::invalid("cluster radius must be nonnegative and feature scale positive"));
        }
        Ok(())
    }
}

/// One logistic-regression task: features uniform on the sphere of radius
/// `feature_scale`, labels drawn from the model with parameter `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticTask {
    pub target: Point,
    pub d: usize,
    pub classes: usize,
    pub feature_scale: f64,
}

impl LogisticTask {
    fn class_probabilities(&self, x: &Point) -> Vec<f64> {
        if self.classes == 2 {
            let p1 = 1.0 / (1.0 + (-self.target.dot(x)).exp());
            vec![1.0 - p1, p1]
        } else {
            let logits: Vec<f64> = (0..self.classes)
                .map(|c| {
                    self.target.coords()[c * self.d..(c + 1) * self.d]
                        .iter()
                        .zip(x.iter())
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect();
            let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = logits.iter().map(|z| (z - top).exp()).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|v| v / total).collect()
        }
    }
}

impl TaskDistribution for LogisticTask {
    fn param_dim(&self) -> usize {
        self.target.dim()
    }

    fn sample_losses(&self, m: usize, rng: &mut dyn RngCore) -> Result<Vec<LossFn>> {
        (0..m)
            .map(|_| {
                let x = unit_sphere(self.d, rng).scale(self.feature_scale);
                let u: f64 = rng.random();
                let probs = self.class_probabilities(&x);
                let mut acc = 0.0;
                let mut label = self.classes - 1;
                for (c, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        label = c;
                        break;
                    }
                }
                LossFn::logistic(x, label, self.classes)
            })
            .collect()
    }
}

/// Generates `tasks` logistic tasks with targets `center + cluster_radius·u_t`,
/// `u_t` uniform in the unit ball.
///
/// Task `t` draws from its own ChaCha stream, so two configurations that differ
/// only in `cluster_radius` see the same directions, features and label noise.
pub fn gen_clustered_logistic(spec: &ClusteredLogistic) -> Result<Vec<TaskSequence>> {
    spec.validate()?;
    (0..spec.tasks)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(t as u64);
            let u = unit_ball(spec.param_dim(), &mut rng);
            let mut target = spec.center.clone();
            target.axpy(spec.cluster_radius, &u);
            let task = Arc::new(LogisticTask {
                target,
                d: spec.d,
                classes: spec.classes,
                feature_scale: spec.feature_scale,
            });
            let losses = task.sample_losses(spec.m, &mut rng)?;
            Ok(TaskSequence::new(losses)?.with_distribution(task))
        })
        .collect()
}

/// Task distribution of quadratic losses `(scale/2)‖θ − z‖²` with `z` uniform
/// in a ball of radius `spread` around `mean`.
#[derive(Debug, Clone)]
pub struct QuadraticTask {
    pub mean: Point,
    pub spread: f64,
    pub scale: f64,
    pub set: ConvexSet,
}

impl TaskDistribution for QuadraticTask {
    fn param_dim(&self) -> usize {
        self.mean.dim()
    }

    fn sample_losses(&self, m: usize, rng: &mut dyn RngCore) -> Result<Vec<LossFn>> {
        (0..m)
            .map(|_| {
                let mut z = self.mean.clone();
                z.axpy(self.spread, &unit_ball(self.mean.dim(), rng));
                LossFn::quadratic(z, self.scale, &self.set)
            })
            .collect()
    }
}

/// Quadratic tasks whose means are uniform in a ball of radius `task_spread`
/// around `center`.
#[derive(Debug, Clone)]
pub struct QuadraticMeta {
    pub center: Point,
    pub task_spread: f64,
    pub sample_spread: f64,
    pub scale: f64,
    pub set: ConvexSet,
}

impl MetaDistribution for QuadraticMeta {
    fn sample_task(&self, rng: &mut dyn RngCore) -> Result<Arc<dyn TaskDistribution>> {
        let mut mean = self.center.clone();
        mean.axpy(self.task_spread, &unit_ball(self.center.dim(), rng));
        Ok(Arc::new(QuadraticTask {
            mean,
            spread: self.sample_spread,
            scale: self.scale,
            set: self.set.clone(),
        }))
    }
}

/// Draws `tasks` task distributions from `meta` and `m` losses from each.
pub fn sample_task_stream(
    meta: &dyn MetaDistribution,
    tasks: usize,
    m: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<TaskSequence>> {
    (0..tasks)
        .map(|_| {
            let dist = meta.sample_task(rng)?;
            let losses = dist.sample_losses(m, rng)?;
            Ok(TaskSequence::new(losses)?.with_distribution(dist))
        })
        .collect()
}
