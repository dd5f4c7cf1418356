//! The lifelong meta-algorithm: within-task runs from a learned
//! initialization, update vectors, the similarity guess and the regret ledger.

mod guess;
mod ledger;
mod state;
mod variant;

pub use guess::{variance_tuned_eta, GuessConfig, SimilarityGuess};
pub use ledger::{RegretLedger, TaskRecord};
pub use state::{run_lifelong, run_lifelong_streams, FmrlConfig, MetaLearnerState};
pub use variant::{Fal, FliBatch, FliOnline, MetaMode, SingleTask, Strawman, Variant};
