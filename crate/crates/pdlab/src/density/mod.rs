//! Closed-form and quadrature-based densities: finite-dimensional marginals
//! of the ranked weight vector, the distribution of the largest weight, and
//! the stationary density of the two-cell mass split.

mod ranked;
mod two_type;

pub use ranked::{marginal_density, MarginalDensity, RankedTail};
pub use two_type::{
    two_type_density, two_type_density_with_tol, two_type_drift, TwoTypeCdf, TwoTypeParams,
};
