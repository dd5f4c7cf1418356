use serde::{Deserialize, Serialize};

use crate::geometry::ConvexSet;
use crate::point::Point;
use crate::within_task::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwConfig {
    pub max_iters: usize,
    pub gap_tol: f64,
}

impl Default for FwConfig {
    fn default() -> Self {
        FwConfig {
            max_iters: 10_000,
            gap_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FwResult {
    pub point: Point,
    pub value: f64,
    /// Duality gap `⟨∇f(x), x − s⟩` at the returned point.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Gap observed before each step.
    pub gap_history: Vec<f64>,
}

/// Classic Frank-Wolfe with step `2/(k+2)`. Iterates are convex combinations
/// of oracle outputs, so they stay feasible.
pub fn frank_wolfe(objective: &dyn Objective, set: &ConvexSet, cfg: &FwConfig) -> FwResult {
    frank_wolfe_observed(objective, set, cfg, &mut |_| {})
}

/// Same as [`frank_wolfe`], calling `observe` on every iterate.
pub fn frank_wolfe_observed(
    objective: &dyn Objective,
    set: &ConvexSet,
    cfg: &FwConfig,
    observe: &mut dyn FnMut(&Point),
) -> FwResult {
    let anchor = set.anchor();
    let mut x = set.lmo(&objective.gradient(&anchor)).point;
    let mut gap_history = Vec::new();
    let mut k = 0;
    loop {
        observe(&x);
        let g = objective.gradient(&x);
        let s = set.lmo(&g).point;
        let gap = g.dot(&x.sub(&s)).max(0.0);
        gap_history.push(gap);
        if gap <= cfg.gap_tol || k >= cfg.max_iters {
            return FwResult {
                value: objective.value(&x),
                point: x,
                gap,
                iterations: k,
                converged: gap <= cfg.gap_tol,
                gap_history,
            };
        }
        x = x.lerp(&s, 2.0 / (k as f64 + 2.0));
        k += 1;
    }
}
