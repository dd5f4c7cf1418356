//! Meta-updates on the weighted Bregman losses `σ_s B_R(θ̂_s‖·)`.

use std::fmt::Debug;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{BregmanGeometry, ConvexSet};
use crate::point::Point;

pub trait MetaLearner: Send + Debug {
    fn name(&self) -> &'static str;

    /// The initialization to hand to the next task.
    fn current(&self) -> &Point;

    /// Feeds the loss `weight · B_R(target‖·)` and returns the new play.
    fn update(&mut self, target: &Point, weight: f64) -> Result<Point>;

    /// Update vectors and weights seen so far, oldest first.
    fn history(&self) -> &[(Point, f64)];
}

fn check_weight(weight: f64) -> Result<()> {
    if weight > 0.0 && weight.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("meta weight must be positive, got {weight}")))
    }
}

/// Follow-the-leader. The leader on weighted Bregman losses is the weighted
/// mean of the targets for any regularizer, so this keeps running sums only.
#[derive(Debug, Clone)]
pub struct Ftl {
    phi: Point,
    weighted_sum: Point,
    total_weight: f64,
    history: Vec<(Point, f64)>,
}

impl Ftl {
    pub fn new(phi1: Point) -> Self {
        let d = phi1.dim();
        Ftl {
            phi: phi1,
            weighted_sum: Point::zeros(d),
            total_weight: 0.0,
            history: Vec::new(),
        }
    }
}

impl MetaLearner for Ftl {
    fn name(&self) -> &'static str {
        "ftl"
    }

    fn current(&self) -> &Point {
        &self.phi
    }

    fn update(&mut self, target: &Point, weight: f64) -> Result<Point> {
        check_weight(weight)?;
        check_dim(self.phi.dim(), target.dim())?;
        self.weighted_sum.axpy(weight, target);
        self.total_weight += weight;
        self.phi = self.weighted_sum.scale(1.0 / self.total_weight);
        self.history.push((target.clone(), weight));
        Ok(self.phi.clone())
    }

    fn history(&self) -> &[(Point, f64)] {
        &self.history
    }
}

/// Adaptive online gradient descent for the Euclidean geometry, with step
/// `1/σ_{1:t}` on the gradient `σ_t(φ_t − θ̂_t)`. The first update lands
/// exactly on the first target.
#[derive(Debug, Clone)]
pub struct Aogd {
    phi: Point,
    set: ConvexSet,
    total_weight: f64,
    history: Vec<(Point, f64)>,
}

impl Aogd {
    pub fn new(phi1: Point, geometry: &BregmanGeometry, set: &ConvexSet) -> Result<Self> {
        if !geometry.is_euclidean() {
            return Err(Error::Unsupported(format!(
                "adaptive OGD meta-updates need the euclidean geometry, not {}",
                geometry.name()
            )));
        }
        check_dim(set.dim(), phi1.dim())?;
        Ok(Aogd {
            phi: phi1,
            set: set.clone(),
            total_weight: 0.0,
            history: Vec::new(),
        })
    }
}

impl MetaLearner for Aogd {
    fn name(&self) -> &'static str {
        "aogd"
    }

    fn current(&self) -> &Point {
        &self.phi
    }

    fn update(&mut self, target: &Point, weight: f64) -> Result<Point> {
        check_weight(weight)?;
        check_dim(self.phi.dim(), target.dim())?;
        self.total_weight += weight;
        let stepped = if self.history.is_empty() {
            target.clone()
        } else {
            self.phi.lerp(target, weight / self.total_weight)
        };
        self.phi = self.set.project(&stepped);
        self.history.push((target.clone(), weight));
        Ok(self.phi.clone())
    }

    fn history(&self) -> &[(Point, f64)] {
        &self.history
    }
}
