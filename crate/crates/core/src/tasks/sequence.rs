use std::fmt::Debug;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::within_task::{LossFn, StaticStream};

/// A distribution over losses of one task, used to draw fresh samples.
pub trait TaskDistribution: Send + Sync + Debug {
    fn param_dim(&self) -> usize;

    fn sample_losses(&self, m: usize, rng: &mut dyn RngCore) -> Result<Vec<LossFn>>;
}

/// A distribution over task distributions.
pub trait MetaDistribution: Send + Sync + Debug {
    fn sample_task(&self, rng: &mut dyn RngCore) -> Result<Arc<dyn TaskDistribution>>;
}

/// The ordered losses of one task and the bound `G_t` on their Lipschitz constants.
#[derive(Debug, Clone)]
pub struct TaskSequence {
    losses: Vec<LossFn>,
    lipschitz: f64,
    distribution: Option<Arc<dyn TaskDistribution>>,
}

impl TaskSequence {
    /// Uses the largest declared Lipschitz constant as `G_t`.
    pub fn new(losses: Vec<LossFn>) -> Result<Self> {
        let first = losses.first().ok_or(Error::Empty("a task needs at least one loss"))?;
        let dim = first.param_dim();
        if let Some(bad) = losses.iter().find(|l| l.param_dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.param_dim(),
            });
        }
        let lipschitz = losses.iter().map(LossFn::lipschitz).fold(0.0, f64::max);
        Ok(TaskSequence {
            losses,
            lipschitz,
            distribution: None,
        })
    }

    /// Replaces `G_t`; the override may not undercut any loss's own bound.
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Result<Self> {
        let needed = self.losses.iter().map(LossFn::lipschitz).fold(0.0, f64::max);
        if !(lipschitz >= needed * (1.0 - 1e-12)) || !lipschitz.is_finite() {
            return Err(Error::invalid(format!(
                "Lipschitz override {lipschitz} is below the losses' bound {needed}"
            )));
        }
        self.lipschitz = lipschitz;
        Ok(self)
    }

    pub fn with_distribution(mut self, distribution: Arc<dyn TaskDistribution>) -> Self {
        self.distribution = Some(distribution);
        self
    }

    pub fn losses(&self) -> &[LossFn] {
        &self.losses
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn rounds(&self) -> usize {
        self.losses.len()
    }

    pub fn param_dim(&self) -> usize {
        self.losses[0].param_dim()
    }

    pub fn distribution(&self) -> Option<&Arc<dyn TaskDistribution>> {
        self.distribution.as_ref()
    }

    pub fn stream(&self) -> StaticStream<'_> {
        StaticStream::new(&self.losses, self.lipschitz)
    }
}
