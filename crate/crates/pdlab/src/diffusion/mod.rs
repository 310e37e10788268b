//! Dynamics whose stationary laws are the ranked-weight distributions:
//! the truncated unlabeled mass diffusion, the one-dimensional two-cell
//! projection, and exact up-down chains on partitions.

mod two_type;
mod unlabeled;
mod updown;

pub use two_type::{
    ensemble_selected_positions, ensemble_stationary_positions, TwoTypeDiffusion,
};
pub use unlabeled::{
    ensemble_power_moments, ensemble_stationary_phi2, quadratic_fitness_increment, MomentCurve,
    UnlabeledConfig, UnlabeledDiffusion,
};
pub use updown::UpDownChain;
