//! Closed-form regret envelopes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BregmanGeometry;
use crate::point::Point;

/// Inputs of the task-averaged regret envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeInputs {
    /// Action diameter: `D² ≥ max(D*², max_θ B_R(θ‖φ₁))`.
    pub d: f64,
    /// Task diameter: largest root divergence between hindsight optima.
    pub d_star: f64,
    /// Hull constant `C = G'²/2`.
    pub c: f64,
    pub g: f64,
    pub m: f64,
    pub t: f64,
}

impl EnvelopeInputs {
    fn validate(&self) -> Result<()> {
        if self.d_star == 0.0 {
            return Err(Error::invalid("the envelope needs a positive task diameter"));
        }
        let all = [self.d, self.d_star, self.c, self.g, self.m, self.t];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid(format!("envelope inputs must be positive: {self:?}")));
        }
        if self.d < self.d_star * (1.0 - 1e-12) {
            return Err(Error::invalid("the action diameter cannot be below the task diameter"));
        }
        Ok(())
    }

    /// The guess parameters the tuned envelope assumes:
    /// `ε = D(1 + ln T)/T` and `γ = (1 + ln T)/ln T`.
    pub fn tuned_guess(&self) -> (f64, f64) {
        let lt = self.t.ln();
        (self.d * (1.0 + lt) / self.t, (1.0 + lt) / lt)
    }
}

/// `((6D + C/D*)(1 + ln T)/T + 4.5 D*)·G√m`
pub fn tar_bound_envelope(inputs: &EnvelopeInputs) -> Result<f64> {
    inputs.validate()?;
    let EnvelopeInputs { d, d_star, c, g, m, t } = *inputs;
    Ok(((6.0 * d + c / d_star) * (1.0 + t.ln()) / t + 4.5 * d_star) * g * m.sqrt())
}

/// The envelope for arbitrary `ε` and `γ > 1`, with average deviation `D̄`:
/// `((2D + 2ε + (C/D*)(1 + ln T) + γ/(γ−1)(D*²/ε + D*))/T + D̄²/D* + γD* + ε)·G√m`.
pub fn tar_bound_general(inputs: &EnvelopeInputs, epsilon: f64, gamma: f64, d_bar: f64) -> Result<f64> {
    inputs.validate()?;
    if !(epsilon > 0.0) || !(gamma > 1.0) || !(d_bar >= 0.0) {
        return Err(Error::invalid("need ε > 0, γ > 1 and D̄ ≥ 0"));
    }
    let EnvelopeInputs { d, d_star, c, g, m, t } = *inputs;
    let transient = 2.0 * d
        + 2.0 * epsilon
        + c / d_star * (1.0 + t.ln())
        + gamma / (gamma - 1.0) * (d_star * d_star / epsilon + d_star);
    Ok((transient / t + d_bar * d_bar / d_star + gamma * d_star + epsilon) * g * m.sqrt())
}

/// `B_R(θ*‖φ)/η + ηG²m`, the single-task regret bound of FTRL and OMD.
pub fn within_task_bound(divergence: f64, eta: f64, g: f64, m: usize) -> f64 {
    divergence / eta + eta * g * g * m as f64
}

/// `((G_R² + 1)/2)·σ_max·(1 + ln T)`, the follow-the-leader regret bound on
/// weighted Bregman losses.
pub fn ftl_regret_bound(g_r: f64, sigma_max: f64, t: usize) -> f64 {
    0.5 * (g_r * g_r + 1.0) * sigma_max * (1.0 + (t as f64).ln())
}

/// Largest `√B_R(x‖y)` over ordered pairs of points.
pub fn task_diameter(geometry: &BregmanGeometry, points: &[Point]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for x in points {
        for y in points {
            best = best.max(geometry.divergence(x, y)?.max(0.0).sqrt());
        }
    }
    Ok(best)
}
