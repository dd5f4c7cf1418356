//! Action spaces, Bregman regularizers and the weighted Bregman mean.

mod bregman;
mod set;

pub use bregman::{
    weighted_bregman_mean, BregmanGeometry, Entropic, Euclidean, NormKind, Regularizer, ENTROPIC_FLOOR,
};
pub use set::{ConvexSet, LmoOutput, MEMBERSHIP_TOL};
