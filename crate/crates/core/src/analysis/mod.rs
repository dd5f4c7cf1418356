//! Regret envelopes, quadratic-growth estimation and online-to-batch
//! evaluation.

mod batch;
mod bounds;
mod frank_wolfe;
mod hull;
mod qg;

pub use batch::{conversion_bound, online_to_batch_eval, BatchContext, BatchEstimate, HELD_OUT_FACTOR};
pub use bounds::{
    ftl_regret_bound, task_diameter, tar_bound_envelope, tar_bound_general, within_task_bound, EnvelopeInputs,
};
pub use frank_wolfe::{frank_wolfe, frank_wolfe_observed, FwConfig, FwResult};
pub use hull::{hull_constant, hull_distance, hull_lipschitz};
pub use qg::{qg_alpha_estimate, Directional, QgEstimate, QgEstimator, Relaxed};
