//! Projected gradient descent for smooth convex objectives over a [`ConvexSet`].

use serde::{Deserialize, Serialize};

use crate::geometry::ConvexSet;
use crate::point::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once the gradient-mapping norm falls to this value.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iters: 10_000,
        }
    }
}

pub trait Objective {
    fn value(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Point;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub point: Point,
    pub value: f64,
    /// Gradient-mapping norm `‖x − Proj(x − ∇f(x))‖` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn gradient_mapping_norm(set: &ConvexSet, x: &Point, grad: &Point) -> f64 {
    let mut step = x.clone();
    step.axpy(-1.0, grad);
    x.dist(&set.project(&step))
}

const MIN_STEP: f64 = 1e-20;
const MAX_STEP: f64 = 1e12;

/// Minimizes `objective` over `set` from `start` (projected first).
///
/// Each step starts from a Barzilai-Borwein length and halves it until the
/// descent-lemma inequality holds.
pub fn projected_gradient(
    objective: &dyn Objective,
    set: &ConvexSet,
    start: &Point,
    cfg: &SolverConfig,
) -> SolveReport {
    let mut x = set.project(start);
    let mut fx = objective.value(&x);
    let mut g = objective.gradient(&x);
    let mut step = 1.0;
    let mut residual = gradient_mapping_norm(set, &x, &g);
    let mut iterations = 0;

    while residual > cfg.tol && iterations < cfg.max_iters {
        iterations += 1;
        let (x_new, f_new) = loop {
            let mut trial = x.clone();
            trial.axpy(-step, &g);
            let trial = set.project(&trial);
            let diff = trial.sub(&x);
            let f_trial = objective.value(&trial);
            let model = fx + g.dot(&diff) + diff.norm_sq() / (2.0 * step);
            if f_trial <= model + 1e-15 * fx.abs().max(1.0) || step <= MIN_STEP {
                break (trial, f_trial);
            }
            step *= 0.5;
        };
        let g_new = objective.gradient(&x_new);
        let s = x_new.sub(&x);
        let y = g_new.sub(&g);
        let sy = s.dot(&y);
        let moved = s.norm_sq();
        x = x_new;
        fx = f_new;
        g = g_new;
        residual = gradient_mapping_norm(set, &x, &g);
        if moved == 0.0 {
            // Stalled at the smallest step; nothing more to gain.
            break;
        }
        step = if sy > 0.0 {
            (moved / sy).clamp(MIN_STEP, MAX_STEP)
        } else {
            (step * 2.0).min(MAX_STEP)
        };
    }

    SolveReport {
        converged: residual <= cfg.tol,
        point: x,
        value: fx,
        residual,
        iterations,
    }
}
