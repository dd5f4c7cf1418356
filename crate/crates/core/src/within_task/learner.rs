//! Parameterized FTRL and lazy OMD plays.

use crate::error::{check_dim, Error, Result};
use crate::geometry::{BregmanGeometry, ConvexSet};
use crate::point::Point;

use super::loss::{total_gradient, total_loss, LossFn, LossKind};
use super::solver::{projected_gradient, Objective, SolverConfig};

/// Result of one within-task play.
#[derive(Debug, Clone, PartialEq)]
pub struct Play {
    pub point: Point,
    pub converged: bool,
    /// Gradient-mapping norm of the inner solve, zero for closed forms.
    pub residual: f64,
}

impl Play {
    fn exact(point: Point) -> Self {
        Play {
            point,
            converged: true,
            residual: 0.0,
        }
    }
}

/// Everything a learner needs besides the observed losses.
#[derive(Debug, Clone, Copy)]
pub struct PlayContext<'a> {
    pub geometry: &'a BregmanGeometry,
    pub set: &'a ConvexSet,
    pub phi: &'a Point,
    pub eta: f64,
    pub solver: &'a SolverConfig,
}

#[derive(Debug, Clone, Copy)]
pub struct History<'a> {
    pub losses: &'a [LossFn],
    /// Sum of the subgradients observed at the actions played so far.
    pub cumulative_gradient: &'a Point,
    pub warm_start: Option<&'a Point>,
}

pub trait WithinTaskLearner: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &'static str;

    fn play(&self, ctx: &PlayContext<'_>, history: &History<'_>) -> Result<Play>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Ftrl;

#[derive(Debug, Clone, Copy, Default)]
pub struct Omd;

impl WithinTaskLearner for Ftrl {
    fn name(&self) -> &'static str {
        "ftrl"
    }

    fn play(&self, ctx: &PlayContext<'_>, history: &History<'_>) -> Result<Play> {
        ftrl_play(
            ctx.geometry,
            ctx.phi,
            ctx.eta,
            history.losses,
            ctx.set,
            ctx.solver,
            history.warm_start,
        )
    }
}

impl WithinTaskLearner for Omd {
    fn name(&self) -> &'static str {
        "omd"
    }

    fn play(&self, ctx: &PlayContext<'_>, history: &History<'_>) -> Result<Play> {
        omd_play(ctx.geometry, ctx.phi, ctx.eta, history.cumulative_gradient, ctx.set).map(Play::exact)
    }
}

/// `argmin_{θ ∈ set} B_R(θ‖φ) + η⟨cumulative_gradient, θ⟩`.
pub fn omd_play(
    geometry: &BregmanGeometry,
    phi: &Point,
    eta: f64,
    cumulative_gradient: &Point,
    set: &ConvexSet,
) -> Result<Point> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::invalid(format!("step size must be positive, got {eta}")));
    }
    check_dim(set.dim(), phi.dim())?;
    check_dim(set.dim(), cumulative_gradient.dim())?;
    geometry.mirror_step(phi, eta, cumulative_gradient, set)
}

/// `argmin_{θ ∈ set} B_R(θ‖φ) + η Σ ℓ(θ)`.
///
/// Linear losses reduce to [`omd_play`] on their gradient sum. Euclidean
/// cone sums with a shared apex use the proximal closed form when it is
/// feasible. Anything else goes to projected gradient descent.
pub fn ftrl_play(
    geometry: &BregmanGeometry,
    phi: &Point,
    eta: f64,
    losses: &[LossFn],
    set: &ConvexSet,
    solver: &SolverConfig,
    warm_start: Option<&Point>,
) -> Result<Play> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::invalid(format!("step size must be positive, got {eta}")));
    }
    check_dim(set.dim(), phi.dim())?;
    if losses.is_empty() {
        return Ok(Play::exact(phi.clone()));
    }
    for l in losses {
        check_dim(set.dim(), l.param_dim())?;
    }
    if losses.iter().all(LossFn::is_linear) {
        let g = total_gradient(losses, phi);
        return omd_play(geometry, phi, eta, &g, set).map(Play::exact);
    }
    if geometry.is_euclidean() {
        if let Some(p) = cone_prox(phi, eta, losses) {
            if set.contains(&p, 1e-12) {
                return Ok(Play::exact(p));
            }
        }
    }

    let objective = FtrlObjective {
        geometry,
        phi,
        eta,
        losses,
    };
    let start = warm_start.unwrap_or(phi);
    let report = projected_gradient(&objective, set, start, solver);
    Ok(Play {
        point: report.point,
        converged: report.converged,
        residual: report.residual,
    })
}

struct FtrlObjective<'a> {
    geometry: &'a BregmanGeometry,
    phi: &'a Point,
    eta: f64,
    losses: &'a [LossFn],
}

impl Objective for FtrlObjective<'_> {
    fn value(&self, x: &Point) -> f64 {
        let reg = self.geometry.divergence(x, self.phi).unwrap_or(f64::INFINITY);
        reg + self.eta * total_loss(self.losses, x)
    }

    fn gradient(&self, x: &Point) -> Point {
        let mut g = self
            .geometry
            .divergence_grad_first(x, self.phi)
            .unwrap_or_else(|_| Point::zeros(x.dim()));
        g.axpy(self.eta, &total_gradient(self.losses, x));
        g
    }
}

/// Unconstrained minimizer of `½‖θ − φ‖² + η Σ ℓ(θ)` when every loss is
/// linear or a cone sharing one apex and radius.
fn cone_prox(phi: &Point, eta: f64, losses: &[LossFn]) -> Option<Point> {
    let mut linear = Point::zeros(phi.dim());
    let mut apex: Option<(&Point, f64)> = None;
    let mut slope_sum = 0.0;
    for l in losses {
        match l.kind() {
            LossKind::Linear { gradient } => linear.axpy(1.0, gradient),
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
                linear.axpy(1.0, gradient);
                slope_sum += slope;
            }
            _ => return None,
        }
    }
    let (center, radius) = apex?;
    let mut a = phi.clone();
    a.axpy(-eta, &linear);
    let v = a.sub(center);
    let n = v.norm();
    let c = eta * slope_sum;
    Some(if n <= radius {
        a
    } else if n <= radius + c {
        center.add(&v.scale(radius / n))
    } else {
        center.add(&v.scale((n - c) / n))
    })
}
