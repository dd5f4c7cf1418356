//! The task-similarity guess `D_t` that sets each task's step size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GuessConfig {
    /// Start above the largest possible divergence, then use `γ^k ε` where `k`
    /// counts the tasks whose divergence exceeded the guess.
    Doubling {
        epsilon: f64,
        gamma: f64,
        /// Permits `γ = 1` when `ε` is known to bound the task similarity.
        #[serde(default)]
        known_similarity: bool,
    },
    /// Use the same value for every task.
    Fixed { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Doubling,
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGuess {
    mode: Mode,
    epsilon: f64,
    gamma: f64,
    k: u32,
    current: f64,
}

impl SimilarityGuess {
    /// Doubling guess with first value `√max_divergence + ε`.
    pub fn doubling(epsilon: f64, gamma: f64, known_similarity: bool, max_divergence: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::invalid(format!("gamma must be at least 1, got {gamma}")));
        }
        if gamma == 1.0 && !known_similarity {
            return Err(Error::invalid(
                "gamma = 1 disables tuning and needs known_similarity = true",
            ));
        }
        if !(max_divergence >= 0.0) || !max_divergence.is_finite() {
            return Err(Error::invalid("maximum divergence must be finite and nonnegative"));
        }
        Ok(SimilarityGuess {
            mode: Mode::Doubling,
            epsilon,
            gamma,
            k: 0,
            current: max_divergence.sqrt() + epsilon,
        })
    }

    pub fn fixed(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::invalid(format!("fixed similarity must be positive, got {value}")));
        }
        Ok(SimilarityGuess {
            mode: Mode::Fixed,
            epsilon: value,
            gamma: 1.0,
            k: 0,
            current: value,
        })
    }

    pub fn from_config(cfg: &GuessConfig, max_divergence: f64) -> Result<Self> {
        match *cfg {
            GuessConfig::Doubling {
                epsilon,
                gamma,
                known_similarity,
            } => SimilarityGuess::doubling(epsilon, gamma, known_similarity, max_divergence),
            GuessConfig::Fixed { value } => SimilarityGuess::fixed(value),
        }
    }

    /// `D_t` for the upcoming task.
    pub fn current(&self) -> f64 {
        self.current
    }

    /// Violations so far.
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_doubling(&self) -> bool {
        self.mode == Mode::Doubling
    }

    /// Records `√B_R(θ̂_t‖φ_t)` for the finished task and moves to `D_{t+1}`.
    /// Returns whether the guess was violated.
    pub fn observe(&mut self, root_divergence: f64) -> bool {
        let violated = self.current < root_divergence;
        if violated {
            self.k += 1;
        }
        if self.mode == Mode::Doubling {
            self.current = self.gamma.powi(self.k as i32) * self.epsilon;
        }
        violated
    }
}

/// `η = D̄/(G√m)`, the step size for a known similarity `D̄`. A zero `G`
/// is replaced by 1, which is still a valid Lipschitz bound.
pub fn variance_tuned_eta(d_bar: f64, lipschitz: f64, m: f64) -> Result<f64> {
    if !(d_bar > 0.0) {
        return Err(Error::invalid(format!("D̄ must be positive, got {d_bar}")));
    }
    if !(m > 0.0) {
        return Err(Error::invalid(format!("m must be positive, got {m}")));
    }
    Ok(d_bar / (effective_lipschitz(lipschitz) * m.sqrt()))
}

pub(crate) fn effective_lipschitz(g: f64) -> f64 {
    if g > 0.0 {
        g
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_guess_adds_epsilon() {
        let g = SimilarityGuess::doubling(0.1, 1.1, false, 0.5).unwrap();
        assert!((g.current() - 0.807_106_781_186_547_5).abs() < 1e-12);
    }

    #[test]
    fn two_violations_give_gamma_squared_epsilon() {
        let mut g = SimilarityGuess::doubling(0.1, 1.1, false, 0.0).unwrap();
        assert!(g.observe(1.0));
        assert!(g.observe(1.0));
        assert!((g.current() - 0.121).abs() < 1e-15);
        assert!(!g.observe(0.0));
        assert_eq!(g.k(), 2);
        assert!((g.current() - 0.121).abs() < 1e-15);
    }

    #[test]
    fn gamma_one_needs_known_similarity() {
        assert!(SimilarityGuess::doubling(0.1, 1.0, false, 1.0).is_err());
        assert!(SimilarityGuess::doubling(0.1, 1.0, true, 1.0).is_ok());
        assert!(SimilarityGuess::doubling(0.1, 0.9, true, 1.0).is_err());
        assert!(SimilarityGuess::doubling(0.0, 1.5, false, 1.0).is_err());
    }

    #[test]
    fn fixed_guess_never_moves() {
        let mut g = SimilarityGuess::fixed(0.3).unwrap();
        assert!(g.observe(1.0));
        assert_eq!(g.current(), 0.3);
    }

    #[test]
    fn variance_tuning() {
        assert!((variance_tuned_eta(0.5, 1.0, 25.0).unwrap() - 0.1).abs() < 1e-15);
        assert!((variance_tuned_eta(1.0, 2.0, 4.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(variance_tuned_eta(0.0, 1.0, 4.0).is_err());
    }
}
