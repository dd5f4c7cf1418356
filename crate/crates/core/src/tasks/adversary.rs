//! Adaptive adversary that forces task-averaged regret of order `G D* √m`.

use crate::error::{Error, Result};
use crate::point::Point;
use crate::within_task::{LossFn, LossStream};

const SURVIVAL: f64 = 1e-12;

/// Plays `ℓ_i(θ) = ⟨∇_i, θ − φ*⟩ + (G/2)·max{0, ‖θ − φ*‖ − D*/2}` where
/// `∇_i` has norm `G/2` and is orthogonal both to the agent's action
/// (relative to `φ*`) and to every earlier gradient of the task.
#[derive(Debug, Clone)]
pub struct AdversaryStream {
    center: Point,
    diameter: f64,
    lipschitz: f64,
    rounds: usize,
    cumulative: Point,
    round: usize,
}

impl AdversaryStream {
    pub fn new(center: Point, diameter: f64, lipschitz: f64, rounds: usize) -> Result<Self> {
        if center.dim() < 3 {
            return Err(Error::invalid(format!(
                "the adversary needs dimension at least 3, got {}",
                center.dim()
            )));
        }
        if !(diameter > 0.0) || !(lipschitz > 0.0) || rounds == 0 {
            return Err(Error::invalid("adversary needs positive D*, G and rounds"));
        }
        let d = center.dim();
        Ok(AdversaryStream {
            center,
            diameter,
            lipschitz,
            rounds,
            cumulative: Point::zeros(d),
            round: 0,
        })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn cumulative_gradient(&self) -> &Point {
        &self.cumulative
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Radius of the zero region of the cone, `D*/2`.
    pub fn cone_radius(&self) -> f64 {
        self.diameter / 2.0
    }
}

impl LossStream for AdversaryStream {
    fn rounds(&self) -> usize {
        self.rounds
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn next_loss(&mut self, action: &Point) -> Result<LossFn> {
        let offset = action.sub(&self.center);
        let dir = orthogonal_direction(&[&offset, &self.cumulative])
            .ok_or_else(|| Error::Infeasible("no direction orthogonal to the constraints".into()))?;
        let gradient = dir.scale(self.lipschitz / 2.0);
        self.cumulative.axpy(1.0, &gradient);
        self.round += 1;
        LossFn::cone(gradient, self.center.clone(), self.cone_radius(), self.lipschitz / 2.0)
    }
}

fn remove_components(v: &mut Point, basis: &[Point]) {
    for q in basis {
        let c = v.dot(q);
        v.axpy(-c, q);
    }
}

/// Unit vector orthogonal to every constraint: Gram-Schmidt on the
/// constraints, then the first canonical basis vector (in index order) whose
/// residual survives. Each residual is orthogonalized twice.
pub(crate) fn orthogonal_direction(constraints: &[&Point]) -> Option<Point> {
    let d = constraints.first()?.dim();
    let mut basis: Vec<Point> = Vec::new();
    for c in constraints {
        let mut v = (*c).clone();
        remove_components(&mut v, &basis);
        remove_components(&mut v, &basis);
        let n = v.norm();
        if n > SURVIVAL * c.norm().max(1.0) {
            basis.push(v.scale(1.0 / n));
        }
    }
    for i in 0..d {
        let mut v = Point::basis(d, i);
        remove_components(&mut v, &basis);
        remove_components(&mut v, &basis);
        let n = v.norm();
        if n > SURVIVAL {
            let mut u = v.scale(1.0 / n);
            remove_components(&mut u, &basis);
            return Some(u.scale(1.0 / u.norm()));
        }
    }
    None
}
