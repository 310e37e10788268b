//! Finite-dimensional marginal densities of the ranked weight vector.
//!
//! The joint density of the top `n` ranked weights factorizes into an
//! explicit product part and one structural factor: the probability that the
//! largest weight of an independent copy, rescaled by the unassigned mass,
//! stays below the smallest retained weight. That factor, written `R(s) =
//! P(s * w_1 <= 1)`, satisfies a one-dimensional integral recursion in which
//! the concentration parameter grows by the discount at each nesting level:
//!
//! ```text
//! R_theta(s) = 1 - c(theta) * int_{1/s}^1 t^(-alpha-1) (1-t)^(theta+alpha-1)
//!                              R_(theta+alpha)((1-t)/t) dt,
//! c(theta) = Gamma(theta+1) / (Gamma(1-alpha) Gamma(theta+alpha)),
//! ```
//!
//! with `R = 1` on `s <= 1`. Each extra unit of `s` costs one nesting level,
//! so a table of depth `ceil(s_max) - 1` supports all queries below `s_max`.
//! [`RankedTail`] tabulates the levels bottom-up on panels clustered at the
//! integrable endpoint singularities.

use crate::core::{log_gamma, PdParams};
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// Number of geometric panels on each side of a level table.
const PANELS_LEFT: usize = 1000;
const PANELS_RIGHT: usize = 1200;
/// Distance to 1 where the integral switches to its analytic sliver.
const EDGE_DELTA: f64 = 1e-10;

/// Normalizing constant of the size-one marginal at the given level
/// parameter: `Gamma(theta + 1) / (Gamma(1 - alpha) Gamma(theta + alpha))`.
pub(crate) fn size_one_constant(alpha: f64, theta: f64) -> Result<f64> {
    Ok((log_gamma(theta + 1.0)? - log_gamma(1.0 - alpha)? - log_gamma(theta + alpha)?).exp())
}

struct LevelTable {
    /// Ascending query points, starting just above 1.
    s: Vec<f64>,
    r: Vec<f64>,
}

impl LevelTable {
    /// Three-point Lagrange interpolation; the grid is dense enough that
    /// the quadratic's non-monotone wiggle stays below table accuracy.
    fn eval(&self, s: f64) -> f64 {
        if s <= self.s[0] {
            return 1.0;
        }
        let n = self.s.len();
        if s >= self.s[n - 1] {
            return self.r[n - 1];
        }
        let hi = self.s.partition_point(|&v| v < s);
        let i0 = if hi + 1 < n { hi - 1 } else { hi - 2 };
        let (x0, x1, x2) = (self.s[i0], self.s[i0 + 1], self.s[i0 + 2]);
        let (y0, y1, y2) = (self.r[i0], self.r[i0 + 1], self.r[i0 + 2]);
        let l0 = (s - x1) * (s - x2) / ((x0 - x1) * (x0 - x2));
        let l1 = (s - x0) * (s - x2) / ((x1 - x0) * (x1 - x2));
        let l2 = (s - x0) * (s - x1) / ((x2 - x0) * (x2 - x1));
        (y0 * l0 + y1 * l1 + y2 * l2).clamp(0.0, 1.0)
    }
}

/// Tabulated distribution function of the largest ranked weight, organized
/// as the rescaled tail `R(s) = P(w_1 <= 1/s)`.
pub struct RankedTail {
    alpha: f64,
    theta: f64,
    s_max: f64,
    /// `levels[k]` carries parameter `theta + k alpha` and covers
    /// `s <= s_max - k`; deeper arguments are at most 1.
    levels: Vec<LevelTable>,
}

impl RankedTail {
    /// Build tables supporting queries with `s < s_max`.
    ///
    /// `theta` is the level-zero parameter; admissibility requires
    /// `0 <= alpha < 1` and `theta + alpha > 0`.
    pub fn build(alpha: f64, theta: f64, s_max: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Domain(format!(
                "alpha must lie in [0, 1), got {alpha}"
            )));
        }
        if !(theta + alpha > 0.0) {
            return Err(Error::Domain(format!(
                "need theta + alpha > 0, got {}",
                theta + alpha
            )));
        }
        if !(2.0..=80.0).contains(&s_max) {
            return Err(Error::Domain(format!(
                "s_max must lie in [2, 80], got {s_max}"
            )));
        }
        let depth = (s_max.ceil() as usize).saturating_sub(1).max(1);
        let (gl_nodes, gl_weights) = gauss_legendre(24);
        let mut levels: Vec<LevelTable> = Vec::with_capacity(depth);
        // deepest level first; its deeper queries all fall in s <= 1
        for k in (0..depth).rev() {
            let level_theta = theta + alpha * k as f64;
            let level_smax = (s_max - k as f64).max(1.0 + 1e-6);
            let deeper = levels.last();
            let table = build_level(
                alpha,
                level_theta,
                level_smax,
                deeper,
                &gl_nodes,
                &gl_weights,
            )?;
            levels.push(table);
        }
        levels.reverse();
        Ok(RankedTail {
            alpha,
            theta,
            s_max,
            levels,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// `P(w_1 <= 1/s)`: 1 on `s <= 1`, 0 beyond the tabulated range (a
    /// conservative lower bound; rebuild with larger `s_max` if that region
    /// matters).
    pub fn prob(&self, s: f64) -> f64 {
        if s <= 1.0 {
            return 1.0;
        }
        if s >= self.s_max {
            return 0.0;
        }
        self.levels[0].eval(s)
    }

    /// Distribution function of the largest ranked weight at `x`.
    pub fn largest_atom_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        self.prob(1.0 / x)
    }
}

fn build_level(
    alpha: f64,
    theta: f64,
    level_smax: f64,
    deeper: Option<&LevelTable>,
    gl_nodes: &[f64],
    gl_weights: &[f64],
) -> Result<LevelTable> {
    let beta = theta + alpha;
    let c = size_one_constant(alpha, theta)?;
    let t_min = 1.0 / level_smax;

    // panel edges geometric toward both singular ends
    let mut edges = Vec::with_capacity(PANELS_LEFT + PANELS_RIGHT + 1);
    for i in 0..PANELS_LEFT {
        edges.push(t_min * (0.5 / t_min).powf(i as f64 / PANELS_LEFT as f64));
    }
    for i in 0..=PANELS_RIGHT {
        let d = 0.5 * (EDGE_DELTA / 0.5).powf(i as f64 / PANELS_RIGHT as f64);
        edges.push(1.0 - d);
    }

    let integrand = |t: f64| -> f64 {
        let deeper_arg = (1.0 - t) / t;
        let r = match deeper {
            Some(table) => {
                if deeper_arg <= 1.0 {
                    1.0
                } else {
                    table.eval(deeper_arg)
                }
            }
            None => 1.0,
        };
        t.powf(-alpha - 1.0) * (1.0 - t).powf(beta - 1.0) * r
    };

    // panel integrals, then cumulative tails from the right
    let n_edges = edges.len();
    let mut panel = vec![0.0; n_edges - 1];
    for j in 0..n_edges - 1 {
        let (a, b) = (edges[j], edges[j + 1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in gl_nodes.iter().zip(gl_weights) {
            acc += w * integrand(mid + half * x);
        }
        panel[j] = half * acc;
    }
    // analytic sliver over [1 - delta, 1]: integrand ~ (1 - t)^(beta - 1)
    let sliver = EDGE_DELTA.powf(beta) / beta;

    let mut s_vals = Vec::with_capacity(n_edges);
    let mut r_vals = Vec::with_capacity(n_edges);
    let mut tail = sliver;
    // edge n_edges-1 is nearest to 1, i.e. smallest s
    for j in (0..n_edges).rev() {
        let s = 1.0 / edges[j];
        let r = 1.0 - c * tail;
        s_vals.push(s);
        r_vals.push(r.clamp(0.0, 1.0));
        if j > 0 {
            tail += panel[j - 1];
        }
    }
    if r_vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("tail table produced non-finite values".into()));
    }
    Ok(LevelTable {
        s: s_vals,
        r: r_vals,
    })
}

/// Joint density of the top `n` ranked weights with a cached tail table.
pub struct MarginalDensity {
    alpha: f64,
    theta: f64,
    n: usize,
    log_const: f64,
    tail: RankedTail,
}

impl MarginalDensity {
    /// Cache the structural tail for dimension `n`; queries must satisfy
    /// `(1 - sum x) / x_n < s_max`.
    pub fn new(params: &PdParams, n: usize, s_max: f64) -> Result<Self> {
        let (alpha, theta) = match *params {
            PdParams::TwoParam { alpha, theta } => (alpha, theta),
            PdParams::FiniteCase { .. } => {
                return Err(Error::UnsupportedRegime(
                    "ranked marginals are implemented for the two-parameter regime".into(),
                ))
            }
        };
        if n == 0 {
            return Err(Error::Domain("need dimension n >= 1".into()));
        }
        let mut log_const = 0.0;
        for i in 1..=n {
            log_const += log_gamma(theta + 1.0 + alpha * (i as f64 - 1.0))?
                - log_gamma(1.0 - alpha)?
                - log_gamma(theta + alpha * i as f64)?;
        }
        let tail = RankedTail::build(alpha, theta + alpha * n as f64, s_max)?;
        Ok(MarginalDensity {
            alpha,
            theta,
            n,
            log_const,
            tail,
        })
    }

    /// Density at a decreasing positive vector `xs` with `sum < 1`.
    pub fn density(&self, xs: &[f64]) -> Result<f64> {
        if xs.len() != self.n {
            return Err(Error::Domain(format!(
                "expected {} coordinates, got {}",
                self.n,
                xs.len()
            )));
        }
        let mut sum = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::Domain(format!("coordinate {i} must be positive")));
            }
            if i > 0 && x > xs[i - 1] {
                return Err(Error::Domain(format!(
                    "coordinates must be decreasing, violated at index {i}"
                )));
            }
            sum += x;
        }
        if sum >= 1.0 {
            return Err(Error::Domain(format!(
                "coordinates must sum below 1, got {sum}"
            )));
        }
        let rest = 1.0 - sum;
        let s = rest / xs[self.n - 1];
        if s >= self.tail.s_max() {
            return Err(Error::Capacity(format!(
                "query needs tail range {s:.2} but the table stops at {}",
                self.tail.s_max()
            )));
        }
        let mut log_v = self.log_const;
        for &x in xs {
            log_v -= (self.alpha + 1.0) * x.ln();
        }
        log_v += (self.theta + self.alpha * self.n as f64 - 1.0) * rest.ln();
        Ok(log_v.exp() * self.tail.prob(s))
    }
}

/// One-shot marginal density; builds a tail table sized for this query.
/// Construct [`MarginalDensity`] directly when evaluating many points.
pub fn marginal_density(params: &PdParams, xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Domain("need at least one coordinate".into()));
    }
    let sum: f64 = xs.iter().sum();
    let last = *xs.last().expect("nonempty");
    if !(last > 0.0) || sum >= 1.0 {
        // full validation happens inside density()
        return MarginalDensity::new(params, xs.len(), 4.0)?.density(xs);
    }
    let s = (1.0 - sum) / last;
    let s_max = (s + 1.5).clamp(2.0, 80.0);
    MarginalDensity::new(params, xs.len(), s_max)?.density(xs)
}
