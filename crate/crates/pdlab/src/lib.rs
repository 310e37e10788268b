//! Exact and stochastic tools for two-parameter ranked random discrete
//! distributions and their measure-valued diffusions.
//!
//! The crate is organized around one parameter object ([`core::PdParams`])
//! shared by several layers:
//!
//! * [`partitions`]: integer partitions, exact partition-structure
//!   probabilities, and block-count identities.
//! * [`powersum`]: a small commutative algebra of power-sum observables, the
//!   diffusion generator acting on it, stationary expectations, spectral
//!   decompositions, and closed-form moment flows.
//! * [`sampling`]: stick-breaking, ranked, exchangeable-partition, and
//!   subordinator-based samplers, all seed-addressable.
//! * [`diffusion`]: Euler-Maruyama simulators for the ranked infinite
//!   dimensional diffusion and its two-type projection, a partition-valued
//!   up-down chain, and selection tilts.
//! * [`density`]: finite-dimensional marginal densities of the ranked vector
//!   and the stationary density of the two-type projection.
//! * [`verify`]: self-check suites pinning the layers against each other and
//!   against closed forms.
//!
//! The `pdlab` binary exposes all of it behind a JSON-first command line.

pub mod cli;
pub mod core;
pub mod density;
pub mod diffusion;
pub mod error;
pub mod partitions;
pub mod powersum;
pub mod quad;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod verify;

pub use crate::core::{PdParams, RankedWeights};
pub use error::{Error, Result};
