//! Measurements on the convex hull of a set of update vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{BregmanGeometry, ConvexSet};
use crate::point::Point;
use crate::within_task::{projected_gradient, Objective, SolverConfig};

struct HullResidual<'a> {
    vertices: &'a [Point],
    target: &'a Point,
}

impl HullResidual<'_> {
    fn combine(&self, w: &Point) -> Point {
        let mut p = Point::zeros(self.target.dim());
        for (v, &wi) in self.vertices.iter().zip(w.iter()) {
            p.axpy(wi, v);
        }
        p
    }
}

impl Objective for HullResidual<'_> {
    fn value(&self, w: &Point) -> f64 {
        0.5 * self.combine(w).dist_sq(self.target)
    }

    fn gradient(&self, w: &Point) -> Point {
        let r = self.combine(w).sub(self.target);
        Point::new(self.vertices.iter().map(|v| v.dot(&r)).collect())
    }
}

/// Euclidean distance from `p` to the convex hull of `vertices`, found by
/// projected gradient over the simplex of mixture weights.
pub fn hull_distance(p: &Point, vertices: &[Point]) -> Result<f64> {
    if vertices.is_empty() {
        return Err(Error::Empty("hull needs at least one vertex"));
    }
    let n = vertices.len();
    let objective = HullResidual { vertices, target: p };
    let simplex = ConvexSet::simplex(n, 0.0)?;
    let report = projected_gradient(
        &objective,
        &simplex,
        &Point::filled(n, 1.0 / n as f64),
        &SolverConfig {
            tol: 1e-13,
            max_iters: 50_000,
        },
    );
    Ok(objective.combine(&report.point).dist(p))
}

/// `G' = max ‖∇_φ B_R(θ̂‖φ)‖₂` over update vectors `θ̂` and hull points `φ`.
/// The hull is represented by its vertices plus `samples` random mixtures.
pub fn hull_lipschitz(geometry: &BregmanGeometry, points: &[Point], samples: usize, seed: u64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("hull needs at least one vertex"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes: Vec<Point> = points.to_vec();
    for _ in 0..samples {
        let w: Vec<f64> = (0..points.len()).map(|_| -rng.random::<f64>().ln()).collect();
        let total: f64 = w.iter().sum();
        let mut p = Point::zeros(points[0].dim());
        for (v, wi) in points.iter().zip(&w) {
            p.axpy(wi / total, v);
        }
        probes.push(p);
    }
    let mut best: f64 = 0.0;
    for theta in points {
        for phi in &probes {
            best = best.max(geometry.divergence_grad_second(theta, phi)?.norm());
        }
    }
    Ok(best)
}

/// `C = G'²/2`.
pub fn hull_constant(g_prime: f64) -> f64 {
    0.5 * g_prime * g_prime
}
