//! Closed-form mean flow of single power sums along the diffusion.
//!
//! The means `E_j(t) = E[phi_j(X_t)]` obey a bidiagonal linear system: each
//! order couples only to the order below,
//!
//! ```text
//! dE_j/dt = a_j E_{j-1} - lambda_j E_j,
//!     a_j = j (j - 1 - alpha) / 2,
//!     lambda_j = j (j - 1 + theta) / 2,
//! ```
//!
//! seeded by the constant `E_1 = 1`. The rates are strictly increasing, so
//! the solution expands exactly in the exponentials `exp(-lambda_i t)` plus a
//! constant mode, with coefficients given by a first-order recurrence.

use super::spectrum::decay_rate;
use crate::core::PdParams;
use crate::error::{Error, Result};

/// Mean power sums at time `t` for orders `2..=max_order`.
///
/// `init[j - 2]` must hold `E[phi_j]` at time zero; the result uses the same
/// layout. The degenerate single-atom state has all initial means equal to 1.
pub fn moment_flow(params: &PdParams, max_order: u32, init: &[f64], t: f64) -> Result<Vec<f64>> {
    if max_order < 2 || max_order > 64 {
        return Err(Error::Domain(format!(
            "max_order must lie in [2, 64], got {max_order}"
        )));
    }
    if init.len() != (max_order - 1) as usize {
        return Err(Error::Domain(format!(
            "init must hold orders 2..={max_order}, expected length {}, got {}",
            max_order - 1,
            init.len()
        )));
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("initial means must be finite".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    let alpha = params.alpha();
    let theta = params.theta();
    let jmax = max_order as usize;

    // mode rates: nu[0] = 0 for the constant source, nu[j-1] = lambda_j
    let mut nu = vec![0.0; jmax];
    for j in 2..=jmax {
        nu[j - 1] = decay_rate(theta, j as u32);
    }
    // coeff[j-1][i] multiplies exp(-nu[i] t) in E_j
    let mut coeff = vec![vec![0.0; jmax]; jmax];
    coeff[0][0] = 1.0;
    for j in 2..=jmax {
        let aj = 0.5 * (j as f64) * (j as f64 - 1.0 - alpha);
        let lj = nu[j - 1];
        let mut partial = 0.0;
        for i in 0..j - 1 {
            let gap = lj - nu[i];
            if gap.abs() < 1e-12 {
                return Err(Error::Numeric(format!(
                    "degenerate rate gap between orders {j} and {}",
                    i + 1
                )));
            }
            coeff[j - 1][i] = aj * coeff[j - 2][i] / gap;
            partial += coeff[j - 1][i];
        }
        coeff[j - 1][j - 1] = init[j - 2] - partial;
    }

    let mut out = Vec::with_capacity(jmax - 1);
    for j in 2..=jmax {
        let mut v = 0.0;
        for i in 0..j {
            v += coeff[j - 1][i] * (-nu[i] * t).exp();
        }
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powersum::{pd_expectation, PowerSumPoly};

    fn tp(alpha: f64, theta: f64) -> PdParams {
        PdParams::new_two_param(alpha, theta).unwrap()
    }

    #[test]
    fn pair_coincidence_exponential() {
        // dE_2/dt = (1 - alpha) - (1 + theta) E_2 solves to an exponential
        // relaxation toward (1 - alpha) / (1 + theta)
        let params = tp(0.0, 1.0);
        let t = 0.5f64.ln() / -2.0;
        let out = moment_flow(&params, 2, &[1.0], t).unwrap();
        assert!((out[0] - 0.75).abs() < 1e-14);
        for t in [0.0, 0.1, 1.0, 3.0] {
            let out = moment_flow(&params, 2, &[1.0], t).unwrap();
            let exact = 0.5 + 0.5 * (-2.0 * t).exp();
            assert!((out[0] - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn time_zero_returns_init() {
        let params = tp(0.5, 0.5);
        let init = [1.0, 0.9, 0.7, 0.44];
        let out = moment_flow(&params, 5, &init, 0.0).unwrap();
        for (a, b) in out.iter().zip(init.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn long_time_limit_is_stationary() {
        for params in [tp(0.5, 0.5), tp(0.0, 1.0), tp(0.3, 0.0), tp(0.8, -0.4)] {
            let init = vec![1.0; 7];
            let out = moment_flow(&params, 8, &init, 300.0).unwrap();
            for (j, v) in (2u32..=8).zip(out.iter()) {
                let stat = pd_expectation(&params, &PowerSumPoly::phi(j).unwrap()).unwrap();
                assert!((v - stat).abs() < 1e-12, "{params} order {j}: {v} vs {stat}");
            }
        }
    }

    #[test]
    fn flow_satisfies_the_differential_equation() {
        let params = tp(0.4, 0.8);
        let (alpha, theta) = (0.4, 0.8);
        let init = [1.0, 1.0, 1.0, 1.0, 1.0];
        let (t, h) = (0.3, 1e-5);
        let up = moment_flow(&params, 6, &init, t + h).unwrap();
        let down = moment_flow(&params, 6, &init, t - h).unwrap();
        let mid = moment_flow(&params, 6, &init, t).unwrap();
        for j in 2..=6usize {
            let deriv = (up[j - 2] - down[j - 2]) / (2.0 * h);
            let ej1 = if j == 2 { 1.0 } else { mid[j - 3] };
            let aj = 0.5 * (j as f64) * (j as f64 - 1.0 - alpha);
            let lj = 0.5 * (j as f64) * (j as f64 - 1.0 + theta);
            let rhs = aj * ej1 - lj * mid[j - 2];
            assert!((deriv - rhs).abs() < 1e-6, "order {j}: {deriv} vs {rhs}");
        }
    }

    #[test]
    fn flow_stays_in_unit_interval_from_delta_state() {
        let params = tp(0.5, 0.5);
        let init = vec![1.0; 5];
        for t in [0.01, 0.1, 0.5, 2.0, 10.0] {
            for v in moment_flow(&params, 6, &init, t).unwrap() {
                assert!((0.0..=1.0 + 1e-12).contains(&v), "t = {t}: {v}");
            }
        }
    }

    #[test]
    fn argument_validation() {
        let params = tp(0.5, 0.5);
        assert!(moment_flow(&params, 1, &[], 0.1).is_err());
        assert!(moment_flow(&params, 3, &[1.0], 0.1).is_err());
        assert!(moment_flow(&params, 2, &[1.0], -0.1).is_err());
        assert!(moment_flow(&params, 2, &[f64::NAN], 0.1).is_err());
    }
}
