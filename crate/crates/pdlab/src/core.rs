//! Parameter regimes, ranked weight vectors, and the small set of special
//! functions the rest of the crate leans on.
//!
//! Everything downstream receives parameters as a [`PdParams`] value, so the
//! admissibility checks live here and are done exactly once.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Shared numerical tolerances and structural caps.
///
/// Exact identities are checked at [`tol::ABS_TOL`]; constraints that only
/// hold up to accumulated rounding (weight normalization, detailed balance)
/// use [`tol::BALANCE_TOL`]. Monte Carlo checks use [`tol::SE_MULT`] standard
/// errors, and distributional tests run at significance [`tol::SIGNIFICANCE`].
pub mod tol {
    /// Absolute tolerance for closed-form identities.
    pub const ABS_TOL: f64 = 1e-10;
    /// Tolerance for normalization / reversibility residuals.
    pub const BALANCE_TOL: f64 = 1e-12;
    /// Width of Monte Carlo acceptance bands, in standard errors.
    pub const SE_MULT: f64 = 3.0;
    /// Significance level for distributional goodness-of-fit tests.
    pub const SIGNIFICANCE: f64 = 0.01;
    /// Largest weight supported by exhaustive partition enumeration.
    pub const MAX_ENUM_N: u32 = 60;
    /// Largest number of factors in a correlation-style expectation.
    pub const MAX_FACTORS: usize = 10;
    /// Largest total degree accepted by the expectation routines.
    pub const MAX_TOTAL_DEGREE: u32 = 64;
    /// Largest degree for spectral decompositions.
    pub const MAX_SPECTRUM_DEGREE: u32 = 20;
    /// Default absolute tolerance handed to the adaptive quadrature.
    pub const QUAD_TOL: f64 = 1e-9;
    /// Largest admissible Euler step for the simulators.
    pub const MAX_DT: f64 = 0.1;
}

/// Parameter pair for the two-parameter ranked-frequency family.
///
/// `TwoParam { alpha, theta }` requires `0 <= alpha < 1` and `theta > -alpha`.
/// `FiniteCase { kappa, m }` is the ranked symmetric Dirichlet with `m` atoms
/// and concentration `kappa > 0`; it plugs into the same formulas through the
/// substitution `alpha = -kappa`, `theta = m * kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PdParams {
    TwoParam { alpha: f64, theta: f64 },
    FiniteCase { kappa: f64, m: u32 },
}

impl PdParams {
    pub fn new_two_param(alpha: f64, theta: f64) -> Result<Self> {
        if !alpha.is_finite() || !theta.is_finite() {
            return Err(Error::Domain("alpha and theta must be finite".into()));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Domain(format!(
                "alpha must lie in [0, 1), got {alpha}"
            )));
        }
        if theta <= -alpha {
            return Err(Error::Domain(format!(
                "theta must exceed -alpha, got theta = {theta} with alpha = {alpha}"
            )));
        }
        Ok(PdParams::TwoParam { alpha, theta })
    }

    pub fn new_finite_case(kappa: f64, m: u32) -> Result<Self> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
        }
        if m < 2 {
            return Err(Error::Domain(format!("need at least 2 atoms, got {m}")));
        }
        Ok(PdParams::FiniteCase { kappa, m })
    }

    /// Discount parameter; negative in the finite case.
    pub fn alpha(&self) -> f64 {
        match *self {
            PdParams::TwoParam { alpha, .. } => alpha,
            PdParams::FiniteCase { kappa, .. } => -kappa,
        }
    }

    /// Concentration parameter; `m * kappa` in the finite case.
    pub fn theta(&self) -> f64 {
        match *self {
            PdParams::TwoParam { theta, .. } => theta,
            PdParams::FiniteCase { kappa, m } => f64::from(m) * kappa,
        }
    }

    pub fn is_finite_case(&self) -> bool {
        matches!(self, PdParams::FiniteCase { .. })
    }
}

impl std::fmt::Display for PdParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            PdParams::TwoParam { alpha, theta } => write!(f, "(alpha={alpha}, theta={theta})"),
            PdParams::FiniteCase { kappa, m } => write!(f, "(kappa={kappa}, m={m})"),
        }
    }
}

/// Ranked mass vector: finitely many atoms in decreasing order plus the
/// leftover (dust) mass, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedWeights {
    weights: Vec<f64>,
    residual: f64,
}

impl RankedWeights {
    /// Build from atoms already sorted in decreasing order.
    ///
    /// Invariants checked: every weight nonnegative and finite, order
    /// decreasing, and `sum + residual = 1` within [`tol::BALANCE_TOL`].
    pub fn new(weights: Vec<f64>, residual: f64) -> Result<Self> {
        let mut sum = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Domain(format!("weight {i} is invalid: {w}")));
            }
            if i > 0 && w > weights[i - 1] {
                return Err(Error::Domain(format!(
                    "weights must be decreasing, violated at index {i}"
                )));
            }
            sum += w;
        }
        if !residual.is_finite() || residual < -tol::BALANCE_TOL {
            return Err(Error::Domain(format!("residual is invalid: {residual}")));
        }
        if (sum + residual - 1.0).abs() > tol::BALANCE_TOL {
            return Err(Error::Domain(format!(
                "weights plus residual must sum to 1, got {}",
                sum + residual
            )));
        }
        Ok(RankedWeights {
            weights,
            residual: residual.max(0.0),
        })
    }

    /// Sorts the atoms before applying the usual checks.
    pub fn from_unsorted(mut weights: Vec<f64>, residual: f64) -> Result<Self> {
        weights.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self::new(weights, residual)
    }

    /// The degenerate state with a single atom of full mass.
    pub fn delta() -> Self {
        RankedWeights {
            weights: vec![1.0],
            residual: 0.0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Power sum `sum_i w_i^m` over the atoms; the dust contributes nothing
    /// for `m >= 2`, and `m = 1` returns the total atomic mass.
    pub fn power_sum(&self, m: u32) -> f64 {
        if m == 1 {
            return self.weights.iter().sum();
        }
        self.weights.iter().map(|w| w.powi(m as i32)).sum()
    }
}

/// Natural log of the gamma function for positive arguments.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "log_gamma needs a positive argument, got {x}"
        )));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!(
            "beta parameters must be positive, got a = {a}, b = {b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x must lie in [0, 1], got {x}")));
    }
    Ok(statrs::function::beta::beta_reg(a, b, x))
}

/// Probability that the largest ranked frequency stays below `1 / s` under a
/// single size-biased pick: `1` for `s <= 1`, otherwise the regularized beta
/// tail `I_{1/s}(1 - alpha, theta_eff + alpha)`.
pub fn dickman_two_param(alpha: f64, theta_eff: f64, s: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    if !(theta_eff + alpha > 0.0) {
        return Err(Error::Domain(format!(
            "need theta_eff + alpha > 0, got {}",
            theta_eff + alpha
        )));
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    if s <= 1.0 {
        return Ok(1.0);
    }
    regularized_incomplete_beta(1.0 - alpha, theta_eff + alpha, 1.0 / s)
}

/// Ascending factorial `(x)_n = x (x + 1) ... (x + n - 1)`.
pub fn ascending_factorial(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..n {
        acc *= x + f64::from(i);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn params_validation() {
        assert!(PdParams::new_two_param(0.5, 0.5).is_ok());
        assert!(PdParams::new_two_param(0.5, -0.25).is_ok());
        assert!(PdParams::new_two_param(0.0, 0.0).is_err());
        assert!(PdParams::new_two_param(1.0, 1.0).is_err());
        assert!(PdParams::new_two_param(-0.1, 1.0).is_err());
        assert!(PdParams::new_two_param(0.5, -0.5).is_err());
        assert!(PdParams::new_two_param(f64::NAN, 1.0).is_err());
        assert!(PdParams::new_finite_case(1.0, 2).is_ok());
        assert!(PdParams::new_finite_case(0.0, 2).is_err());
        assert!(PdParams::new_finite_case(1.0, 1).is_err());
    }

    #[test]
    fn finite_case_maps_to_signed_parameters() {
        let p = PdParams::new_finite_case(0.25, 4).unwrap();
        assert_eq!(p.alpha(), -0.25);
        assert_eq!(p.theta(), 1.0);
        assert!(p.is_finite_case());
    }

    #[test]
    fn ranked_weights_validation() {
        assert!(RankedWeights::new(vec![0.5, 0.3, 0.2], 0.0).is_ok());
        assert!(RankedWeights::new(vec![0.5, 0.3], 0.2).is_ok());
        // increasing order
        assert!(RankedWeights::new(vec![0.3, 0.5], 0.2).is_err());
        // bad total
        assert!(RankedWeights::new(vec![0.5, 0.3], 0.1).is_err());
        // negative weight
        assert!(RankedWeights::new(vec![0.5, -0.1], 0.6).is_err());
        // tiny negative residual is forgiven and clamped
        let w = RankedWeights::new(vec![0.6, 0.4 + 1e-13], -1e-13).unwrap();
        assert!(w.residual() >= 0.0);
    }

    #[test]
    fn ranked_weights_power_sums() {
        let w = RankedWeights::new(vec![0.5, 0.3, 0.2], 0.0).unwrap();
        assert!((w.power_sum(1) - 1.0).abs() < 1e-15);
        assert!((w.power_sum(2) - 0.38).abs() < 1e-15);
        assert!((w.power_sum(3) - 0.16).abs() < 1e-15);
        let dusty = RankedWeights::new(vec![0.5], 0.5).unwrap();
        assert!((dusty.power_sum(1) - 0.5).abs() < 1e-15);
        assert!((dusty.power_sum(2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn log_gamma_known_values() {
        assert!((log_gamma(1.0).unwrap()).abs() < 1e-14);
        assert!((log_gamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-12);
        assert!((log_gamma(0.5).unwrap() - 0.5 * PI.ln()).abs() < 1e-12);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn incomplete_beta_known_values() {
        // I_x(2, 2) = 3x^2 - 2x^3 rescaled: 6 int t(1-t) = 3x^2 - 2x^3
        let x: f64 = 0.3;
        let exact = 3.0 * x * x - 2.0 * x * x * x;
        assert!((regularized_incomplete_beta(2.0, 2.0, x).unwrap() - exact).abs() < 1e-12);
        assert!((regularized_incomplete_beta(1.0, 1.0, 0.42).unwrap() - 0.42).abs() < 1e-12);
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 1.0).unwrap(), 1.0);
        assert!(regularized_incomplete_beta(0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn dickman_values() {
        // s <= 1 saturates
        assert_eq!(dickman_two_param(0.5, 0.5, 0.7).unwrap(), 1.0);
        assert_eq!(dickman_two_param(0.5, 0.5, 1.0).unwrap(), 1.0);
        // alpha = theta_eff = 1/2, s = 2: I_{1/2}(1/2, 1) = sqrt(1/2)
        let v = dickman_two_param(0.5, 0.5, 2.0).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-12);
        // alpha = 0 reduces to the beta tail of a Beta(1, theta_eff)
        let v0 = dickman_two_param(0.0, 1.5, 4.0).unwrap();
        let exact = 1.0 - (1.0 - 0.25f64).powf(1.5);
        assert!((v0 - exact).abs() < 1e-12);
        assert!(dickman_two_param(0.5, -0.5, 2.0).is_err());
        assert!(dickman_two_param(0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn ascending_factorial_values() {
        assert_eq!(ascending_factorial(3.0, 0), 1.0);
        assert_eq!(ascending_factorial(3.0, 3), 60.0);
        assert!((ascending_factorial(0.5, 2) - 0.75).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn beta_symmetry(a in 0.1f64..5.0, b in 0.1f64..5.0, x in 0.0f64..=1.0) {
            let lhs = regularized_incomplete_beta(a, b, x).unwrap();
            let rhs = regularized_incomplete_beta(b, a, 1.0 - x).unwrap();
            prop_assert!((lhs + rhs - 1.0).abs() < 1e-9);
        }

        #[test]
        fn dickman_monotone_in_s(s1 in 1.0f64..20.0, ds in 0.0f64..5.0) {
            let lo = dickman_two_param(0.4, 0.6, s1 + ds).unwrap();
            let hi = dickman_two_param(0.4, 0.6, s1).unwrap();
            prop_assert!(lo <= hi + 1e-12);
        }

        #[test]
        fn ranked_weights_roundtrip(raw in proptest::collection::vec(0.0f64..1.0, 1..8)) {
            let total: f64 = raw.iter().sum::<f64>() + 0.5;
            let scaled: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let residual = 1.0 - scaled.iter().sum::<f64>();
            let w = RankedWeights::from_unsorted(scaled, residual).unwrap();
            prop_assert!(w.residual() >= 0.0);
            for pair in w.weights().windows(2) {
                prop_assert!(pair[0] >= pair[1]);
            }
        }
    }
}
