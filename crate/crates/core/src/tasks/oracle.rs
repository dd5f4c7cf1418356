//! Best fixed action in hindsight.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::ConvexSet;
use crate::point::Point;
use crate::within_task::{
    projected_gradient, total_gradient, total_loss, LossFn, LossKind, Objective, SolverConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Gradient-mapping norm at which a solve counts as converged.
    pub tol: f64,
    /// Residual up to which an unconverged solve is still used (and flagged).
    pub fail_tol: f64,
    pub max_iters: usize,
    /// Weight of the `(λ/2)‖θ‖²` term that selects the minimum-norm optimum.
    pub min_norm_weight: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            tol: 1e-8,
            fail_tol: 1e-4,
            max_iters: 10_000,
            min_norm_weight: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleStatus {
    Converged,
    /// Stopped between `tol` and `fail_tol`.
    Approximate,
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub point: Point,
    /// `Σ ℓ(θ*)`, without the min-norm term.
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub status: OracleStatus,
}

struct Regularized<'a> {
    losses: &'a [LossFn],
    weight: f64,
}

impl Objective for Regularized<'_> {
    fn value(&self, x: &Point) -> f64 {
        total_loss(self.losses, x) + 0.5 * self.weight * x.norm_sq()
    }

    fn gradient(&self, x: &Point) -> Point {
        let mut g = total_gradient(self.losses, x);
        g.axpy(self.weight, x);
        g
    }
}

fn exact(losses: &[LossFn], point: Point) -> OracleResult {
    OracleResult {
        value: total_loss(losses, &point),
        point,
        residual: 0.0,
        iterations: 0,
        status: OracleStatus::Converged,
    }
}

/// Approximate minimum-norm minimizer of `Σ ℓ` over `set`.
pub fn hindsight_oracle(losses: &[LossFn], set: &ConvexSet, cfg: &OracleConfig) -> Result<OracleResult> {
    if losses.is_empty() {
        return Err(Error::Empty("the hindsight oracle needs at least one loss"));
    }
    for l in losses {
        check_dim(set.dim(), l.param_dim())?;
    }
    if losses.iter().all(LossFn::is_linear) {
        let g = total_gradient(losses, &Point::zeros(set.dim()));
        let point = if g.norm() == 0.0 {
            set.project(&Point::zeros(set.dim()))
        } else {
            set.lmo(&g).point
        };
        return Ok(exact(losses, point));
    }
    if let Some(p) = cone_sum_minimizer(losses) {
        if set.contains(&p, 1e-12) {
            return Ok(exact(losses, p));
        }
    }

    let objective = Regularized {
        losses,
        weight: cfg.min_norm_weight,
    };
    let start = set.project(&Point::zeros(set.dim()));
    let report = projected_gradient(
        &objective,
        set,
        &start,
        &SolverConfig {
            tol: cfg.tol,
            max_iters: cfg.max_iters,
        },
    );
    let status = if report.converged {
        OracleStatus::Converged
    } else if report.residual <= cfg.fail_tol {
        OracleStatus::Approximate
    } else {
        OracleStatus::Failed
    };
    Ok(OracleResult {
        value: total_loss(losses, &report.point),
        point: report.point,
        residual: report.residual,
        iterations: report.iterations,
        status,
    })
}

/// Unconstrained minimizer of a sum of linear and cone losses sharing one
/// apex and radius, when the sum is bounded below.
fn cone_sum_minimizer(losses: &[LossFn]) -> Option<Point> {
    let mut linear: Option<Point> = None;
    let mut apex: Option<(&Point, f64)> = None;
    let mut slope_sum = 0.0;
    for l in losses {
        let g = match l.kind() {
            LossKind::Linear { gradient } => gradient,
            LossKind::Cone {
                gradient,
                center,
                radius,
                slope,
            } => {
                match apex {
                    None => apex = Some((center, *radius)),
                    Some((c, r)) if c == center && r == *radius => {}
                    Some(_) => return None,
                }
                slope_sum += slope;
                gradient
            }
            _ => return None,
        };
        match linear.as_mut() {
            None => linear = Some(g.clone()),
            Some(s) => s.axpy(1.0, g),
        }
    }
    let (center, radius) = apex?;
    let s = linear?;
    let n = s.norm();
    if n > slope_sum {
        return None;
    }
    if n == 0.0 {
        return Some(center.clone());
    }
    // Along -s the sum decreases at rate ‖s‖ until the cone switches on at
    // `radius`, then changes at rate slope_sum − ‖s‖ ≥ 0.
    Some(center.add(&s.scale(-radius / n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_outside_the_ball() {
        let unit = ConvexSet::centered_ball(2, 1.0).unwrap();
        let l = [LossFn::quadratic(Point::from([1.0, 0.0]), 1.0, &unit).unwrap()];
        let r = hindsight_oracle(&l, &unit, &OracleConfig::default()).unwrap();
        assert_eq!(r.status, OracleStatus::Converged);
        assert!(r.point.dist(&Point::from([1.0, 0.0])) < 1e-7);
    }

    #[test]
    fn linear_loss_hits_the_lmo() {
        let unit = ConvexSet::centered_ball(2, 1.0).unwrap();
        let g = Point::from([3.0, -4.0]);
        let r = hindsight_oracle(&[LossFn::linear(g.clone())], &unit, &OracleConfig::default()).unwrap();
        assert_eq!(r.point, g.scale(-1.0 / 5.0));
    }

    #[test]
    fn cone_sum_sits_on_the_cone_boundary() {
        let center = Point::zeros(3);
        let losses: Vec<LossFn> = [[0.5, 0.0, 0.0], [0.0, 0.5, 0.0]]
            .into_iter()
            .map(|g| LossFn::cone(Point::from(g), center.clone(), 0.5, 0.5).unwrap())
            .collect();
        let ball = ConvexSet::centered_ball(3, 1.0).unwrap();
        let r = hindsight_oracle(&losses, &ball, &OracleConfig::default()).unwrap();
        assert!((r.point.norm() - 0.5).abs() < 1e-15);
        assert!((r.value + 0.5 * 0.5 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_task_is_an_error() {
        let unit = ConvexSet::centered_ball(2, 1.0).unwrap();
        assert!(hindsight_oracle(&[], &unit, &OracleConfig::default()).is_err());
    }
}
