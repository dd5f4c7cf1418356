//! Quadratic-growth estimates `α_δ = 2ε_δ/δ²`, where `ε_δ` is the least
//! excess loss at distance `δ` from the minimizer.

use std::fmt::Debug;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ConvexSet;
use crate::point::Point;
use crate::tasks::unit_sphere;
use crate::within_task::Objective;

use super::frank_wolfe::{frank_wolfe, FwConfig};

/// Solves for `ε_δ` over the radius-`B` ball centered at the origin.
pub trait QgEstimator: Send + Sync + Debug {
    fn name(&self) -> &'static str;

    /// Returns `(ε_δ, final Frank-Wolfe gap)`.
    fn excess_at(
        &self,
        f: &dyn Objective,
        theta_star: &Point,
        radius: f64,
        delta: f64,
        fw: &FwConfig,
    ) -> Result<(f64, f64)>;
}

/// Minimizes over the convex relaxation `‖θ‖ ≤ B`, `2⟨θ*, θ⟩ ≤ B² − δ² + ‖θ*‖²`
/// of the nonconvex region `‖θ‖ ≤ B`, `‖θ − θ*‖ ≥ δ`. The result is a lower
/// bound on the true `ε_δ`; it is zero whenever `‖θ*‖² ≤ B² − δ²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Relaxed;

/// Minimizes over the slabs `‖θ‖ ≤ B`, `⟨u, θ − θ*⟩ ≥ δ` for a fixed set of
/// unit directions `u` and keeps the smallest value. Every slab lies inside
/// the true region, so the result is an upper bound on `ε_δ`, and it is exact
/// for isotropic quadratics.
#[derive(Debug, Clone, Copy)]
pub struct Directional {
    pub random_directions: usize,
    pub seed: u64,
}

impl Default for Directional {
    fn default() -> Self {
        Directional {
            random_directions: 8,
            seed: 0,
        }
    }
}

impl QgEstimator for Relaxed {
    fn name(&self) -> &'static str {
        "relaxed"
    }

    fn excess_at(
        &self,
        f: &dyn Objective,
        theta_star: &Point,
        radius: f64,
        delta: f64,
        fw: &FwConfig,
    ) -> Result<(f64, f64)> {
        let d = theta_star.dim();
        let offset = radius * radius - delta * delta + theta_star.norm_sq();
        let set = if theta_star.norm() == 0.0 {
            if offset < 0.0 {
                return Err(Error::Infeasible(format!("δ = {delta} exceeds the radius")));
            }
            ConvexSet::centered_ball(d, radius)?
        } else {
            ConvexSet::ball_halfspace(Point::zeros(d), radius, theta_star.scale(2.0), offset)?
        };
        let r = frank_wolfe(f, &set, fw);
        Ok(((r.value - f.value(theta_star)).max(0.0), r.gap))
    }
}

impl Directional {
    fn directions(&self, theta_star: &Point) -> Vec<Point> {
        let d = theta_star.dim();
        let mut dirs = Vec::with_capacity(2 * d + 2 + self.random_directions);
        let n = theta_star.norm();
        if n > 0.0 {
            let u = theta_star.scale(1.0 / n);
            dirs.push(u.scale(-1.0));
            dirs.push(u);
        }
        for i in 0..d {
            dirs.push(Point::basis(d, i));
            dirs.push(Point::basis(d, i).scale(-1.0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random_directions {
            dirs.push(unit_sphere(d, &mut rng));
        }
        dirs
    }
}

impl QgEstimator for Directional {
    fn name(&self) -> &'static str {
        "directional"
    }

    fn excess_at(
        &self,
        f: &dyn Objective,
        theta_star: &Point,
        radius: f64,
        delta: f64,
        fw: &FwConfig,
    ) -> Result<(f64, f64)> {
        let d = theta_star.dim();
        let f_star = f.value(theta_star);
        let mut best: Option<(f64, f64)> = None;
        for u in self.directions(theta_star) {
            // ⟨u, θ⟩ ≥ δ + ⟨u, θ*⟩ written as ⟨−u, θ⟩ ≤ −(δ + ⟨u, θ*⟩).
            let level = delta + u.dot(theta_star);
            if level >= radius {
                continue;
            }
            let set = ConvexSet::ball_halfspace(Point::zeros(d), radius, u.scale(-1.0), -level)?;
            let r = frank_wolfe(f, &set, fw);
            let eps = (r.value - f_star).max(0.0);
            if best.is_none_or(|(b, _)| eps < b) {
                best = Some((eps, r.gap));
            }
        }
        best.ok_or_else(|| Error::Infeasible(format!("no point at distance {delta} from θ* lies in the ball")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QgEstimate {
    pub deltas: Vec<f64>,
    pub eps: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Final Frank-Wolfe duality gaps.
    pub gaps: Vec<f64>,
}

impl QgEstimate {
    /// Entries whose certificate gap is at most `tol`.
    pub fn accepted(&self, tol: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gaps
            .iter()
            .zip(self.deltas.iter().zip(&self.alpha))
            .filter(move |(g, _)| **g <= tol)
            .map(|(_, (d, a))| (*d, *a))
    }
}

/// Runs `estimator` at every `δ` of the grid; `θ*` should minimize `f` over
/// the radius-`B` ball.
pub fn qg_alpha_estimate(
    estimator: &dyn QgEstimator,
    f: &dyn Objective,
    theta_star: &Point,
    radius: f64,
    deltas: &[f64],
    fw: &FwConfig,
) -> Result<QgEstimate> {
    if !(radius > 0.0) {
        return Err(Error::invalid("radius must be positive"));
    }
    if theta_star.norm() > radius * (1.0 + 1e-9) {
        return Err(Error::invalid("θ* lies outside the ball"));
    }
    let mut out = QgEstimate {
        deltas: deltas.to_vec(),
        eps: Vec::with_capacity(deltas.len()),
        alpha: Vec::with_capacity(deltas.len()),
        gaps: Vec::with_capacity(deltas.len()),
    };
    for &delta in deltas {
        if !(delta > 0.0) || delta >= 2.0 * radius {
            return Err(Error::invalid(format!("δ = {delta} must lie in (0, 2B)")));
        }
        let (eps, gap) = estimator.excess_at(f, theta_star, radius, delta, fw)?;
        out.eps.push(eps);
        out.alpha.push(2.0 * eps / (delta * delta));
        out.gaps.push(gap);
    }
    Ok(out)
}
