//! Stationary law of the mass assigned to one of two cells.
//!
//! Splitting the atoms of the random measure by an independent coin with
//! success probability `p` gives a random mass `X` in `(0, 1)`. Its density
//! `q` comes from a boundary-value representation: with
//!
//! ```text
//! h(t) = p (1-t)^alpha + (1-p) t^alpha e^(i alpha pi),
//! delta(t) = Im[h'(t) h(t)^(-theta/alpha - 1)] / (alpha pi),
//! ```
//!
//! the density is the fractional integral
//! `q(x) = theta int_0^x (x - t)^(theta-1) delta(t) dt` for `theta > 0`,
//! and `q = delta` itself when `theta = 0`, where the integral collapses to
//! a closed form of Lamperti type. Near either boundary `q` behaves like a
//! power with exponent `theta + alpha - 1`; the quadratures below substitute
//! that exponent away rather than fight the singularity.

use crate::core::PdParams;
use crate::error::{Error, Result};
use crate::quad::integrate;

const DEFAULT_TOL: f64 = 1e-9;

/// Parameters of the two-cell split: the pair `(alpha, theta)` with
/// `0 < alpha < 1`, `theta >= 0`, and the cell weight `0 < p < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTypeParams {
    alpha: f64,
    theta: f64,
    p: f64,
}

impl TwoTypeParams {
    pub fn new(alpha: f64, theta: f64, p: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::Domain(format!("theta must be >= 0, got {theta}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("p must lie in (0, 1), got {p}")));
        }
        Ok(TwoTypeParams { alpha, theta, p })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn pd_params(&self) -> PdParams {
        PdParams::new_two_param(self.alpha, self.theta).expect("validated on construction")
    }

    /// Boundary exponent: `q(x) ~ x^(boundary_exponent)` as `x -> 0`.
    fn boundary_exponent(&self) -> f64 {
        self.theta + self.alpha - 1.0
    }
}

/// Imaginary part of `h'(t) h(t)^(-theta/alpha - 1)` over `alpha pi`.
fn delta_tilde(tp: &TwoTypeParams, t: f64) -> f64 {
    let (alpha, theta, p) = (tp.alpha, tp.theta, tp.p);
    let pb = 1.0 - p;
    let (sin_ap, cos_ap) = (alpha * std::f64::consts::PI).sin_cos();
    let ta = t.powf(alpha);
    let ua = (1.0 - t).powf(alpha);
    let h_re = p * ua + pb * ta * cos_ap;
    let h_im = pb * ta * sin_ap;
    let dta = alpha * t.powf(alpha - 1.0);
    let dua = alpha * (1.0 - t).powf(alpha - 1.0);
    let dh_re = -p * dua + pb * dta * cos_ap;
    let dh_im = pb * dta * sin_ap;
    // h^w in polar form, w = -theta/alpha - 1
    let w = -theta / alpha - 1.0;
    let modulus = h_re.hypot(h_im);
    let arg = h_im.atan2(h_re);
    let (pw_sin, pw_cos) = (w * arg).sin_cos();
    let pw_mod = modulus.powf(w);
    let im = dh_re * pw_mod * pw_sin + dh_im * pw_mod * pw_cos;
    im / (alpha * std::f64::consts::PI)
}

/// Closed form at `theta = 0`: the fractional integral disappears and the
/// density is a ratio of powers of `x` and `1 - x`.
fn lamperti_density(tp: &TwoTypeParams, x: f64) -> f64 {
    let (alpha, p) = (tp.alpha, tp.p);
    let pb = 1.0 - p;
    let xa = x.powf(alpha);
    let ua = (1.0 - x).powf(alpha);
    let cos_ap = (alpha * std::f64::consts::PI).cos();
    let d = pb * pb * xa * xa + 2.0 * p * pb * xa * ua * cos_ap + p * p * ua * ua;
    (alpha * std::f64::consts::PI).sin() / std::f64::consts::PI * p * pb
        * x.powf(alpha - 1.0)
        * (1.0 - x).powf(alpha - 1.0)
        / d
}

/// Stationary density of the mass in the `p`-cell at `x`, to absolute
/// quadrature tolerance `tol` (the `theta = 0` branch is closed-form).
pub fn two_type_density_with_tol(tp: &TwoTypeParams, x: f64, tol: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x must lie in (0, 1), got {x}")));
    }
    if tp.theta == 0.0 {
        return Ok(lamperti_density(tp, x));
    }
    if x > 0.5 {
        // cells are exchangeable: q(x; p) = q(1 - x; 1 - p). Evaluating on
        // the left half keeps the t -> x and t -> 1 singular points apart,
        // which the split substitutions below rely on.
        let flipped = TwoTypeParams::new(tp.alpha, tp.theta, 1.0 - tp.p)?;
        return two_type_density_with_tol(&flipped, 1.0 - x, tol);
    }
    let (alpha, theta) = (tp.alpha, tp.theta);
    let half = 0.5 * x;
    // t in (0, x/2): t = (x/2) u^(1/alpha) soaks up delta ~ t^(alpha-1)
    let left = integrate(
        |u| {
            let t = half * u.powf(1.0 / alpha);
            let jac = half / alpha * u.powf(1.0 / alpha - 1.0);
            (x - t).powf(theta - 1.0) * delta_tilde(tp, t) * jac
        },
        0.0,
        1.0,
        tol,
    )?;
    // t in (x/2, x): x - t = (x/2) s^(1/theta) soaks up (x-t)^(theta-1)
    let right = integrate(
        |s| {
            let gap = half * s.powf(1.0 / theta);
            let jac = half / theta * s.powf(1.0 / theta - 1.0);
            gap.powf(theta - 1.0) * delta_tilde(tp, x - gap) * jac
        },
        0.0,
        1.0,
        tol,
    )?;
    Ok(theta * (left.value + right.value))
}

pub fn two_type_density(tp: &TwoTypeParams, x: f64) -> Result<f64> {
    two_type_density_with_tol(tp, x, DEFAULT_TOL)
}

/// Drift of the two-cell mass process,
/// `b(x) = [(1 - 2x) + x (1 - x) q'(x)/q(x)] / 2`.
///
/// The first term pushes toward 1/2; the logarithmic derivative of the
/// stationary density tilts it so that `q` is invariant. At `theta = 0`
/// the log-derivative is analytic; otherwise a central difference on
/// `ln q` with step shrinking near the boundary.
pub fn two_type_drift(tp: &TwoTypeParams, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x must lie in (0, 1), got {x}")));
    }
    let log_deriv = if tp.theta == 0.0 {
        lamperti_log_derivative(tp, x)
    } else {
        let h = 1e-5_f64.min(0.5 * x).min(0.5 * (1.0 - x));
        let hi = two_type_density_with_tol(tp, x + h, 1e-11)?;
        let lo = two_type_density_with_tol(tp, x - h, 1e-11)?;
        if !(hi > 0.0 && lo > 0.0) {
            return Err(Error::Numeric(format!(
                "nonpositive density near x = {x} while differentiating"
            )));
        }
        (hi.ln() - lo.ln()) / (2.0 * h)
    };
    Ok(0.5 * ((1.0 - 2.0 * x) + x * (1.0 - x) * log_deriv))
}

/// `d/dx ln q` for the closed-form branch.
fn lamperti_log_derivative(tp: &TwoTypeParams, x: f64) -> f64 {
    let (alpha, p) = (tp.alpha, tp.p);
    let pb = 1.0 - p;
    let cos_ap = (alpha * std::f64::consts::PI).cos();
    let xa = x.powf(alpha);
    let ua = (1.0 - x).powf(alpha);
    let d = pb * pb * xa * xa + 2.0 * p * pb * xa * ua * cos_ap + p * p * ua * ua;
    let dd = 2.0 * alpha * pb * pb * x.powf(2.0 * alpha - 1.0)
        + 2.0 * alpha * p * pb * cos_ap
            * (x.powf(alpha - 1.0) * ua - xa * (1.0 - x).powf(alpha - 1.0))
        - 2.0 * alpha * p * p * (1.0 - x).powf(2.0 * alpha - 1.0);
    (alpha - 1.0) * (1.0 / x - 1.0 / (1.0 - x)) - dd / d
}

/// Tabulated distribution function of the two-cell mass, for sampling
/// checks. Segment masses are integrated on a grid clustered at both
/// boundaries; inside the outermost segments the cumulative follows the
/// known boundary power instead of a linear interpolant.
pub struct TwoTypeCdf {
    grid: Vec<f64>,
    cum: Vec<f64>,
    total: f64,
    boundary_power: f64,
}

impl TwoTypeCdf {
    pub fn new(tp: &TwoTypeParams, panels: usize) -> Result<Self> {
        Self::with_weight(tp, panels, |_| 1.0)
    }

    /// Distribution of the weighted density `w(x) q(x) / Z`, for smooth
    /// positive `w`; [`Self::total_mass`] reports `Z`. The plain `new` is
    /// the constant-weight case. Fitness tilts of stationary laws are
    /// exactly this shape.
    pub fn with_weight(
        tp: &TwoTypeParams,
        panels: usize,
        weight: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if !(16..=4096).contains(&panels) {
            return Err(Error::Domain(format!(
                "panels must lie in [16, 4096], got {panels}"
            )));
        }
        let beta = tp.boundary_exponent() + 1.0;
        let n = panels;
        let grid: Vec<f64> = (0..=n)
            .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos()))
            .collect();
        let seg_tol = 1e-8;
        let mut cum = vec![0.0; n + 1];
        for j in 0..n {
            let (a, b) = (grid[j], grid[j + 1]);
            let mass = if j == 0 {
                // x = b u^(1/beta) flattens q ~ x^(beta - 1)
                integrate(
                    |u| {
                        let x = b * u.powf(1.0 / beta);
                        let jac = b / beta * u.powf(1.0 / beta - 1.0);
                        let q = two_type_density_with_tol(tp, x, 1e-10).unwrap_or(f64::NAN);
                        weight(x) * q * jac
                    },
                    0.0,
                    1.0,
                    seg_tol,
                )?
                .value
            } else if j == n - 1 {
                let width = 1.0 - a;
                integrate(
                    |u| {
                        let x = 1.0 - width * u.powf(1.0 / beta);
                        let jac = width / beta * u.powf(1.0 / beta - 1.0);
                        let q = two_type_density_with_tol(tp, x, 1e-10).unwrap_or(f64::NAN);
                        weight(x) * q * jac
                    },
                    0.0,
                    1.0,
                    seg_tol,
                )?
                .value
            } else {
                integrate(
                    |x| {
                        weight(x) * two_type_density_with_tol(tp, x, 1e-10).unwrap_or(f64::NAN)
                    },
                    a,
                    b,
                    seg_tol,
                )?
                .value
            };
            cum[j + 1] = cum[j] + mass;
        }
        let total = cum[n];
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Numeric(format!(
                "distribution table mass came out as {total}"
            )));
        }
        Ok(TwoTypeCdf {
            grid,
            cum,
            total,
            boundary_power: beta,
        })
    }

    /// Total integrated mass before normalization; should sit within
    /// quadrature error of 1.
    pub fn total_mass(&self) -> f64 {
        self.total
    }

    /// Normalized distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let n = self.grid.len() - 1;
        let j = self.grid.partition_point(|&g| g < x);
        let raw = if j <= 1 {
            // inside the first segment the cumulative is ~ (x / x1)^beta
            self.cum[1] * (x / self.grid[1]).powf(self.boundary_power)
        } else if j >= n {
            let tail = self.total - self.cum[n - 1];
            self.total
                - tail * ((1.0 - x) / (1.0 - self.grid[n - 1])).powf(self.boundary_power)
        } else {
            let (a, b) = (self.grid[j - 1], self.grid[j]);
            let t = (x - a) / (b - a);
            self.cum[j - 1] + t * (self.cum[j] - self.cum[j - 1])
        };
        (raw / self.total).clamp(0.0, 1.0)
    }
}
