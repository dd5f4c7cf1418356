use serde::Serialize;

use crate::point::Point;
use crate::tasks::OracleStatus;

/// Everything recorded about one task of a lifelong run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRecord {
    /// 1-based task index.
    pub t: usize,
    pub m: usize,
    pub lipschitz: f64,
    pub agent_loss: f64,
    pub comparator_loss: f64,
    pub regret: f64,
    pub d_t: f64,
    pub eta_t: f64,
    /// Violation count before this task.
    pub k_before: u32,
    pub violated: bool,
    /// `√B_R(θ̂_t‖φ_t)`
    pub root_divergence: f64,
    /// `G_t √m_t`
    pub sigma: f64,
    pub phi: Point,
    pub update_vector: Point,
    pub hindsight: Point,
    pub oracle_status: OracleStatus,
    pub oracle_residual: f64,
    pub unconverged_plays: usize,
    /// False when the task was skipped by the meta-update.
    pub meta_updated: bool,
}

impl TaskRecord {
    pub fn counts_toward_tar(&self) -> bool {
        self.oracle_status != OracleStatus::Failed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretLedger {
    pub records: Vec<TaskRecord>,
    pub epsilon: f64,
    pub gamma: f64,
    /// Whether `D_t` followed the doubling rule (as opposed to a fixed value).
    pub doubling: bool,
}

impl RegretLedger {
    pub fn new(epsilon: f64, gamma: f64, doubling: bool) -> Self {
        RegretLedger {
            records: Vec::new(),
            epsilon,
            gamma,
            doubling,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Mean regret over the tasks whose comparator is trusted; NaN if there
    /// are none.
    pub fn tar(&self) -> f64 {
        let (sum, n) = self
            .records
            .iter()
            .filter(|r| r.counts_toward_tar())
            .fold((0.0, 0usize), |(s, n), r| (s + r.regret, n + 1));
        if n == 0 {
            f64::NAN
        } else {
            sum / n as f64
        }
    }

    pub fn violations(&self) -> usize {
        self.records.iter().filter(|r| r.violated).count()
    }

    pub fn excluded(&self) -> usize {
        self.records.iter().filter(|r| !r.counts_toward_tar()).count()
    }

    /// Largest number of violations the doubling rule allows for this run.
    pub fn violation_bound(&self) -> Option<usize> {
        if !self.doubling || self.gamma <= 1.0 {
            return None;
        }
        let max_root = self.records.iter().map(|r| r.root_divergence).fold(0.0, f64::max);
        let steps = (max_root / self.epsilon).ln() / self.gamma.ln();
        Some(steps.ceil().max(0.0) as usize + 1)
    }

    /// Checks the doubling-trick bookkeeping: the guess identity
    /// `D_t = γ^k ε` from the second task on, a non-decreasing count that grows
    /// exactly on violations, and the bound on the number of violations.
    pub fn check_doubling(&self) -> Result<(), String> {
        let mut k = 0u32;
        for r in &self.records {
            if r.k_before != k {
                return Err(format!("task {}: count {} but expected {k}", r.t, r.k_before));
            }
            if r.violated != (r.d_t < r.root_divergence) {
                return Err(format!(
                    "task {}: violation flag {} disagrees with D_t = {} vs √B = {}",
                    r.t, r.violated, r.d_t, r.root_divergence
                ));
            }
            if self.doubling && r.t >= 2 {
                let expected = self.gamma.powi(k as i32) * self.epsilon;
                if (r.d_t - expected).abs() > 1e-12 * expected.max(1.0) {
                    return Err(format!("task {}: D_t = {} but γ^k ε = {expected}", r.t, r.d_t));
                }
            }
            if r.violated {
                k += 1;
            }
        }
        if let Some(bound) = self.violation_bound() {
            if self.violations() > bound {
                return Err(format!("{} violations exceed the bound {bound}", self.violations()));
            }
        }
        Ok(())
    }
}
