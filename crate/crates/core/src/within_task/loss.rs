//! Convex per-round losses with subgradients and declared Lipschitz bounds.

use crate::error::{check_dim, Error, Result};
use crate::geometry::ConvexSet;
use crate::point::Point;

use super::solver::Objective;

#[derive(Debug, Clone, PartialEq)]
pub enum LossKind {
    /// `⟨g, θ⟩`
    Linear { gradient: Point },
    /// Cross-entropy of a linear classifier. With two classes the parameter is
    /// one weight vector and label 1 is the positive class; otherwise the
    /// parameter stacks one weight row per class.
    Logistic {
        features: Point,
        label: usize,
        classes: usize,
    },
    /// `(scale/2)‖θ − center‖²`
    Quadratic { center: Point, scale: f64 },
    /// `max{0, 1 − y⟨x, θ⟩}` with `y = ±1` from label 1/0.
    Hinge { features: Point, label: usize },
    /// `⟨g, θ − center⟩ + slope · max{0, ‖θ − center‖ − radius}`
    Cone {
        gradient: Point,
        center: Point,
        radius: f64,
        slope: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossFn {
    kind: LossKind,
    lipschitz: f64,
}

impl LossFn {
    pub fn linear(gradient: Point) -> Self {
        let lipschitz = gradient.norm();
        LossFn {
            kind: LossKind::Linear { gradient },
            lipschitz,
        }
    }

    /// Logistic loss; `G = ‖x‖₂` for two classes and `√2‖x‖₂` otherwise.
    pub fn logistic(features: Point, label: usize, classes: usize) -> Result<Self> {
        if classes < 2 {
            return Err(Error::invalid("logistic loss needs at least two classes"));
        }
        if label >= classes {
            return Err(Error::invalid(format!("label {label} outside 0..{classes}")));
        }
        let x = features.norm();
        let lipschitz = if classes == 2 { x } else { x * std::f64::consts::SQRT_2 };
        Ok(LossFn {
            kind: LossKind::Logistic {
                features,
                label,
                classes,
            },
            lipschitz,
        })
    }

    /// Quadratic loss with `G = scale · max_{θ ∈ set} ‖θ − center‖`.
    pub fn quadratic(center: Point, scale: f64, set: &ConvexSet) -> Result<Self> {
        check_dim(set.dim(), center.dim())?;
        if !(scale > 0.0) {
            return Err(Error::invalid("quadratic scale must be positive"));
        }
        let lipschitz = scale * set.max_distance_from(&center);
        Ok(LossFn {
            kind: LossKind::Quadratic { center, scale },
            lipschitz,
        })
    }

    pub fn hinge(features: Point, label: usize) -> Result<Self> {
        if label > 1 {
            return Err(Error::invalid("hinge labels are 0 or 1"));
        }
        let lipschitz = features.norm();
        Ok(LossFn {
            kind: LossKind::Hinge { features, label },
            lipschitz,
        })
    }

    pub fn cone(gradient: Point, center: Point, radius: f64, slope: f64) -> Result<Self> {
        check_dim(gradient.dim(), center.dim())?;
        if !(radius >= 0.0) || !(slope >= 0.0) {
            return Err(Error::invalid("cone radius and slope must be nonnegative"));
        }
        let lipschitz = gradient.norm() + slope;
        Ok(LossFn {
            kind: LossKind::Cone {
                gradient,
                center,
                radius,
                slope,
            },
            lipschitz,
        })
    }

    /// Replaces the declared Lipschitz bound.
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    pub fn kind(&self) -> &LossKind {
        &self.kind
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, LossKind::Linear { .. })
    }

    /// Dimension of the parameter the loss acts on.
    pub fn param_dim(&self) -> usize {
        match &self.kind {
            LossKind::Linear { gradient } => gradient.dim(),
            LossKind::Quadratic { center, .. } | LossKind::Cone { center, .. } => center.dim(),
            LossKind::Hinge { features, .. } => features.dim(),
            LossKind::Logistic {
                features, classes, ..
            } => {
                if *classes == 2 {
                    features.dim()
                } else {
                    features.dim() * classes
                }
            }
        }
    }

    pub fn value(&self, theta: &Point) -> f64 {
        debug_assert_eq!(theta.dim(), self.param_dim());
        match &self.kind {
            LossKind::Linear { gradient } => gradient.dot(theta),
            LossKind::Quadratic { center, scale } => 0.5 * scale * theta.dist_sq(center),
            LossKind::Hinge { features, label } => {
                let y = sign(*label);
                (1.0 - y * features.dot(theta)).max(0.0)
            }
            LossKind::Cone {
                gradient,
                center,
                radius,
                slope,
            } => {
                let diff = theta.sub(center);
                gradient.dot(&diff) + slope * (diff.norm() - radius).max(0.0)
            }
            LossKind::Logistic {
                features,
                label,
                classes,
            } => {
                if *classes == 2 {
                    softplus(-sign(*label) * features.dot(theta))
                } else {
                    let logits = class_logits(theta, features, *classes);
                    log_sum_exp(&logits) - logits[*label]
                }
            }
        }
    }

    pub fn subgradient(&self, theta: &Point) -> Point {
        debug_assert_eq!(theta.dim(), self.param_dim());
        match &self.kind {
            LossKind::Linear { gradient } => gradient.clone(),
            LossKind::Quadratic { center, scale } => theta.sub(center).scale(*scale),
            LossKind::Hinge { features, label } => {
                let y = sign(*label);
                if 1.0 - y * features.dot(theta) > 0.0 {
                    features.scale(-y)
                } else {
                    Point::zeros(theta.dim())
                }
            }
            LossKind::Cone {
                gradient,
                center,
                radius,
                slope,
            } => {
                let diff = theta.sub(center);
                let n = diff.norm();
                let mut g = gradient.clone();
                if n > *radius && n > 0.0 {
                    g.axpy(slope / n, &diff);
                }
                g
            }
            LossKind::Logistic {
                features,
                label,
                classes,
            } => {
                if *classes == 2 {
                    let y = sign(*label);
                    let z = y * features.dot(theta);
                    features.scale(-y * sigmoid(-z))
                } else {
                    let logits = class_logits(theta, features, *classes);
                    let lse = log_sum_exp(&logits);
                    let f = features.dim();
                    let mut g = Point::zeros(theta.dim());
                    for (c, &z) in logits.iter().enumerate() {
                        let w = (z - lse).exp() - if c == *label { 1.0 } else { 0.0 };
                        for j in 0..f {
                            g[c * f + j] = w * features[j];
                        }
                    }
                    g
                }
            }
        }
    }
}

fn sign(label: usize) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn class_logits(theta: &Point, features: &Point, classes: usize) -> Vec<f64> {
    let f = features.dim();
    (0..classes)
        .map(|c| {
            theta.coords()[c * f..(c + 1) * f]
                .iter()
                .zip(features.iter())
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let top = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + z.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

pub fn total_loss(losses: &[LossFn], theta: &Point) -> f64 {
    losses.iter().map(|l| l.value(theta)).sum()
}

pub fn total_gradient(losses: &[LossFn], theta: &Point) -> Point {
    let mut g = Point::zeros(theta.dim());
    for l in losses {
        g.axpy(1.0, &l.subgradient(theta));
    }
    g
}

/// `Σ ℓ` as an [`Objective`].
#[derive(Debug, Clone, Copy)]
pub struct LossSum<'a>(pub &'a [LossFn]);

impl Objective for LossSum<'_> {
    fn value(&self, x: &Point) -> f64 {
        total_loss(self.0, x)
    }

    fn gradient(&self, x: &Point) -> Point {
        total_gradient(self.0, x)
    }
}
