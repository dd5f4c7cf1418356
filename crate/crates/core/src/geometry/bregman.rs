//! Bregman regularizers and the geometries they induce.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::geometry::set::ConvexSet;
use crate::point::Point;

/// Default interior floor for entropic geometry.
pub const ENTROPIC_FLOOR: f64 = 1e-10;

/// Norm in which a regularizer is 1-strongly convex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    L1,
}

impl NormKind {
    pub fn eval(self, p: &Point) -> f64 {
        match self {
            NormKind::L2 => p.norm(),
            NormKind::L1 => p.norm_l1(),
        }
    }

    /// `C'` with `‖θ‖ ≤ C'‖θ‖₂`.
    pub fn l2_equivalence(self, dim: usize) -> f64 {
        match self {
            NormKind::L2 => 1.0,
            NormKind::L1 => (dim as f64).sqrt(),
        }
    }
}

/// A strictly convex function `R` whose divergence
/// `B_R(x‖y) = R(x) − R(y) − ⟨∇R(y), x − y⟩` regularizes the within-task
/// learners and serves as the meta-loss.
pub trait Regularizer: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn norm(&self) -> NormKind;

    /// Strong-smoothness constant β ≥ 1 on the admissible domain.
    fn smoothness(&self) -> f64;

    fn is_euclidean(&self) -> bool {
        false
    }

    /// Rejects action spaces the regularizer is not defined on.
    fn check_set(&self, set: &ConvexSet) -> Result<()>;

    fn value(&self, x: &Point) -> Result<f64>;

    fn gradient(&self, x: &Point) -> Result<Point>;

    fn divergence(&self, x: &Point, y: &Point) -> Result<f64> {
        check_dim(x.dim(), y.dim())?;
        let gy = self.gradient(y)?;
        Ok(self.value(x)? - self.value(y)? - gy.dot(&x.sub(y)))
    }

    /// Gradient of `B_R(·‖y)` at `x`, i.e. `∇R(x) − ∇R(y)`.
    fn divergence_grad_first(&self, x: &Point, y: &Point) -> Result<Point> {
        Ok(self.gradient(x)?.sub(&self.gradient(y)?))
    }

    /// Gradient of `B_R(x‖·)` at `y`.
    fn divergence_grad_second(&self, x: &Point, y: &Point) -> Result<Point>;

    /// `argmin_{θ ∈ set} B_R(θ‖φ) + η⟨g, θ⟩`.
    fn mirror_step(&self, phi: &Point, eta: f64, cumulative_gradient: &Point, set: &ConvexSet) -> Result<Point>;

    /// `max_{θ ∈ set} B_R(θ‖φ)`.
    fn max_divergence(&self, set: &ConvexSet, phi: &Point) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl Regularizer for Euclidean {
    fn name(&self) -> &'static str {
        "euclidean"
    }

    fn norm(&self) -> NormKind {
        NormKind::L2
    }

    fn smoothness(&self) -> f64 {
        1.0
    }

    fn is_euclidean(&self) -> bool {
        true
    }

    fn check_set(&self, _set: &ConvexSet) -> Result<()> {
        Ok(())
    }

    fn value(&self, x: &Point) -> Result<f64> {
        Ok(0.5 * x.norm_sq())
    }

    fn gradient(&self, x: &Point) -> Result<Point> {
        Ok(x.clone())
    }

    fn divergence(&self, x: &Point, y: &Point) -> Result<f64> {
        check_dim(x.dim(), y.dim())?;
        Ok(0.5 * x.dist_sq(y))
    }

    fn divergence_grad_first(&self, x: &Point, y: &Point) -> Result<Point> {
        check_dim(x.dim(), y.dim())?;
        Ok(x.sub(y))
    }

    fn divergence_grad_second(&self, x: &Point, y: &Point) -> Result<Point> {
        check_dim(x.dim(), y.dim())?;
        Ok(y.sub(x))
    }

    fn mirror_step(&self, phi: &Point, eta: f64, cumulative_gradient: &Point, set: &ConvexSet) -> Result<Point> {
        check_dim(phi.dim(), cumulative_gradient.dim())?;
        let mut p = phi.clone();
        p.axpy(-eta, cumulative_gradient);
        Ok(set.project(&p))
    }

    fn max_divergence(&self, set: &ConvexSet, phi: &Point) -> Result<f64> {
        check_dim(set.dim(), phi.dim())?;
        Ok(match set {
            ConvexSet::Ball { center, radius } | ConvexSet::BallHalfspace { center, radius, .. } => {
                let r = phi.dist(center) + radius;
                0.5 * r * r
            }
            ConvexSet::Box { lo, hi } => {
                0.5 * phi
                    .iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .map(|(&p, (&l, &h))| ((p - l).powi(2)).max((h - p).powi(2)))
                    .sum::<f64>()
            }
            ConvexSet::Simplex { dim, floor } => (0..*dim)
                .map(|i| 0.5 * simplex_vertex(*dim, *floor, i).dist_sq(phi))
                .fold(0.0, f64::max),
        })
    }
}

/// Negative entropy `R(x) = Σ xᵢ ln xᵢ` on the simplex; its divergence is the
/// KL divergence. Inputs are clamped to `floor` and renormalized before any
/// logarithm is taken.
#[derive(Debug, Clone, Copy)]
pub struct Entropic {
    floor: f64,
}

impl Default for Entropic {
    fn default() -> Self {
        Entropic { floor: ENTROPIC_FLOOR }
    }
}

impl Entropic {
    pub fn new(floor: f64) -> Result<Self> {
        if !(floor > 0.0 && floor < 1.0) {
            return Err(Error::invalid(format!("entropic floor must lie in (0, 1), got {floor}")));
        }
        Ok(Entropic { floor })
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    fn clamp(&self, x: &Point) -> Result<Point> {
        for (index, &value) in x.iter().enumerate() {
            if !value.is_finite() || value < -1e-12 {
                return Err(Error::BelowFloor {
                    index,
                    value,
                    floor: self.floor,
                });
            }
        }
        let clamped = x.map(|v| v.max(self.floor));
        let s = clamped.sum();
        Ok(clamped.scale(1.0 / s))
    }
}

impl Regularizer for Entropic {
    fn name(&self) -> &'static str {
        "entropic"
    }

    fn norm(&self) -> NormKind {
        NormKind::L1
    }

    fn smoothness(&self) -> f64 {
        (1.0 / self.floor).max(1.0)
    }

    fn check_set(&self, set: &ConvexSet) -> Result<()> {
        match set {
            ConvexSet::Simplex { .. } => Ok(()),
            _ => Err(Error::Unsupported(
                "entropic geometry requires a simplex action space".into(),
            )),
        }
    }

    fn value(&self, x: &Point) -> Result<f64> {
        let x = self.clamp(x)?;
        Ok(x.iter().map(|&v| v * v.ln()).sum())
    }

    fn gradient(&self, x: &Point) -> Result<Point> {
        let x = self.clamp(x)?;
        Ok(x.map(|v| v.ln() + 1.0))
    }

    fn divergence(&self, x: &Point, y: &Point) -> Result<f64> {
        check_dim(x.dim(), y.dim())?;
        let x = self.clamp(x)?;
        let y = self.clamp(y)?;
        let kl: f64 = x.iter().zip(y.iter()).map(|(&a, &b)| a * (a / b).ln()).sum();
        Ok(kl.max(0.0))
    }

    fn divergence_grad_second(&self, x: &Point, y: &Point) -> Result<Point> {
        check_dim(x.dim(), y.dim())?;
        let x = self.clamp(x)?;
        let y = self.clamp(y)?;
        Ok(Point::new(x.iter().zip(y.iter()).map(|(&a, &b)| 1.0 - a / b).collect()))
    }

    fn mirror_step(&self, phi: &Point, eta: f64, cumulative_gradient: &Point, set: &ConvexSet) -> Result<Point> {
        self.check_set(set)?;
        check_dim(phi.dim(), cumulative_gradient.dim())?;
        let floor = match set {
            ConvexSet::Simplex { floor, .. } => floor.max(self.floor),
            _ => unreachable!(),
        };
        let phi = self.clamp(phi)?;
        let logits: Vec<f64> = phi
            .iter()
            .zip(cumulative_gradient.iter())
            .map(|(&p, &g)| p.ln() - eta * g)
            .collect();
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        let q = Point::new(weights.into_iter().map(|w| w / total).collect());
        if q.iter().all(|&v| v >= floor) {
            Ok(q)
        } else {
            let d = q.dim() as f64;
            Ok(q.map(|v| floor + (1.0 - d * floor) * v))
        }
    }

    fn max_divergence(&self, set: &ConvexSet, phi: &Point) -> Result<f64> {
        self.check_set(set)?;
        let (dim, floor) = match set {
            ConvexSet::Simplex { dim, floor } => (*dim, floor.max(self.floor)),
            _ => unreachable!(),
        };
        check_dim(dim, phi.dim())?;
        // KL(·‖φ) is convex, so its maximum over the floored simplex sits at a vertex.
        let mut best = 0.0f64;
        for i in 0..dim {
            best = best.max(self.divergence(&simplex_vertex(dim, floor, i), phi)?);
        }
        Ok(best)
    }
}

fn simplex_vertex(dim: usize, floor: f64, i: usize) -> Point {
    let mut v = Point::filled(dim, floor);
    v[i] = 1.0 - (dim as f64 - 1.0) * floor;
    v
}

/// Shared handle to a regularizer; cheap to clone across concurrent runs.
#[derive(Clone)]
pub struct BregmanGeometry(Arc<dyn Regularizer>);

impl BregmanGeometry {
    pub fn new(reg: impl Regularizer + 'static) -> Self {
        BregmanGeometry(Arc::new(reg))
    }

    pub fn euclidean() -> Self {
        Self::new(Euclidean)
    }

    pub fn entropic() -> Self {
        Self::new(Entropic::default())
    }
}

impl fmt::Debug for BregmanGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Deref for BregmanGeometry {
    type Target = dyn Regularizer;

    fn deref(&self) -> &Self::Target {
        self.0.as_ref()
    }
}

/// `Σ αᵢxᵢ / Σ αᵢ`, the minimizer of `Σ αᵢ B_R(xᵢ‖·)` for every strictly
/// convex `R`.
pub fn weighted_bregman_mean(points: &[Point], weights: &[f64]) -> Result<Point> {
    let first = points.first().ok_or(Error::Empty("points"))?;
    check_dim(points.len(), weights.len())?;
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::ZeroWeights);
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroWeights);
    }
    let mut acc = Point::zeros(first.dim());
    for (p, &w) in points.iter().zip(weights) {
        check_dim(first.dim(), p.dim())?;
        acc.axpy(w, p);
    }
    Ok(acc.scale(1.0 / total))
}
