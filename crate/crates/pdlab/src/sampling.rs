//! Samplers for the ranked-frequency family: stick breaking, ranked
//! truncations, seating-rule sample partitions, labeled random measures, the
//! finite symmetric Dirichlet, and an exact tempered-stable construction of
//! joint cell masses.
//!
//! Everything draws from a caller-supplied generator; pair with
//! [`crate::rng::RngStream`] for replayable streams.

use crate::core::{PdParams, RankedWeights};
use crate::error::{Error, Result};
use crate::partitions::IntegerPartition;
use rand::Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma};

/// Size-biased stick-breaking weights.
///
/// Returns `count` weights in stick order together with the unbroken
/// leftover mass. The `k`-th stick fraction is `Beta(1 - alpha, theta + k
/// alpha)`. Two-parameter regime only; the finite case breaks into exactly
/// `m` atoms and lives in [`sample_symmetric_dirichlet_ranked`].
pub fn sample_gem<R: Rng + ?Sized>(
    params: &PdParams,
    count: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, f64)> {
    let (alpha, theta) = match *params {
        PdParams::TwoParam { alpha, theta } => (alpha, theta),
        PdParams::FiniteCase { .. } => {
            return Err(Error::UnsupportedRegime(
                "stick breaking needs the two-parameter regime".into(),
            ))
        }
    };
    if count == 0 {
        return Err(Error::Domain("need at least one stick".into()));
    }
    let mut weights = Vec::with_capacity(count);
    let mut remaining = 1.0;
    for k in 1..=count {
        let b = theta + alpha * k as f64;
        let frac = Beta::new(1.0 - alpha, b)
            .map_err(|e| Error::Domain(format!("invalid stick fraction parameters: {e}")))?
            .sample(rng);
        let w = remaining * frac;
        weights.push(w);
        remaining -= w;
    }
    Ok((weights, remaining.max(0.0)))
}

/// Ranked truncation of the weight sequence: `truncation` sticks, sorted
/// decreasing, with the unbroken mass reported as the residual.
///
/// The residual decays like `k^(-(1 - alpha)/alpha)` in `k = truncation` for
/// `alpha > 0` and geometrically for `alpha = 0`, so discount values close to
/// one need large truncations for accurate ranked tails.
pub fn sample_ranked<R: Rng + ?Sized>(
    params: &PdParams,
    truncation: usize,
    rng: &mut R,
) -> Result<RankedWeights> {
    let (mut weights, residual) = sample_gem(params, truncation, rng)?;
    weights.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    RankedWeights::new(weights, residual)
}

/// Ranked symmetric Dirichlet with `m` atoms of concentration `kappa`:
/// normalized independent gammas, sorted decreasing.
pub fn sample_symmetric_dirichlet_ranked<R: Rng + ?Sized>(
    kappa: f64,
    m: u32,
    rng: &mut R,
) -> Result<RankedWeights> {
    PdParams::new_finite_case(kappa, m)?;
    let gamma = Gamma::new(kappa, 1.0)
        .map_err(|e| Error::Domain(format!("invalid concentration: {e}")))?;
    let mut raw: Vec<f64> = (0..m).map(|_| gamma.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numeric("all gamma variates underflowed to zero".into()));
    }
    for w in &mut raw {
        *w /= total;
    }
    raw.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    RankedWeights::new(raw, 0.0)
}

/// Sample partition of `n` points by the sequential seating rule: a point
/// joins an existing block of size `b` with weight `b - alpha` and opens a
/// new block with weight `theta + (number of blocks) * alpha`.
///
/// Works in both regimes; in the finite case the new-block weight hits zero
/// at `m` blocks and the block count stays capped.
pub fn sample_seating_partition<R: Rng + ?Sized>(
    params: &PdParams,
    n: u32,
    rng: &mut R,
) -> Result<IntegerPartition> {
    if n == 0 {
        return Err(Error::Domain("need n >= 1".into()));
    }
    let alpha = params.alpha();
    let theta = params.theta();
    let mut blocks: Vec<u32> = vec![1];
    for i in 1..n {
        let new_weight = (theta + alpha * blocks.len() as f64).max(0.0);
        let total = f64::from(i) + theta;
        let mut u = rng.gen::<f64>() * total;
        let mut joined = false;
        for b in &mut blocks {
            let w = f64::from(*b) - alpha;
            if u < w {
                *b += 1;
                joined = true;
                break;
            }
            u -= w;
        }
        if !joined {
            // numerical slack lands on the last option
            if new_weight > 0.0 {
                blocks.push(1);
            } else {
                *blocks.last_mut().expect("at least one block") += 1;
            }
        }
    }
    blocks.sort_unstable_by(|a, b| b.cmp(a));
    IntegerPartition::new(blocks)
}

/// Purely atomic random measure: labeled atoms plus unassigned mass.
#[derive(Debug, Clone)]
pub struct AtomicMeasure<L> {
    atoms: Vec<(L, f64)>,
    residual: f64,
}

impl<L> AtomicMeasure<L> {
    pub fn atoms(&self) -> &[(L, f64)] {
        &self.atoms
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Total mass of atoms whose label satisfies the predicate.
    pub fn mass_where<F: Fn(&L) -> bool>(&self, pred: F) -> f64 {
        self.atoms
            .iter()
            .filter(|(l, _)| pred(l))
            .map(|(_, w)| w)
            .sum()
    }
}

/// Random measure with iid labels from `base` attached to the weights:
/// a stick-breaking truncation in the two-parameter regime, all `m` atoms in
/// the finite case (where `truncation` is ignored and the residual is zero).
pub fn sample_labeled_measure<L, R, B>(
    params: &PdParams,
    truncation: usize,
    mut base: B,
    rng: &mut R,
) -> Result<AtomicMeasure<L>>
where
    R: Rng + ?Sized,
    B: FnMut(&mut R) -> L,
{
    let (weights, residual) = match *params {
        PdParams::TwoParam { .. } => sample_gem(params, truncation, rng)?,
        PdParams::FiniteCase { kappa, m } => {
            let ranked = sample_symmetric_dirichlet_ranked(kappa, m, rng)?;
            (ranked.weights().to_vec(), 0.0)
        }
    };
    let atoms = weights.into_iter().map(|w| (base(rng), w)).collect();
    Ok(AtomicMeasure { atoms, residual })
}

/// Standard positive stable variable with index `alpha` in `(0, 1)`,
/// Laplace transform `exp(-lambda^alpha)`, via the trigonometric
/// ratio representation.
pub fn sample_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "stable index must lie in (0, 1), got {alpha}"
        )));
    }
    let u = loop {
        let u: f64 = rng.gen();
        if u > 1e-12 && u < 1.0 {
            break u * std::f64::consts::PI;
        }
    };
    let e: f64 = Exp1.sample(rng);
    let num = (alpha * u).sin().powf(alpha / (1.0 - alpha)) * ((1.0 - alpha) * u).sin();
    let den = u.sin().powf(1.0 / (1.0 - alpha));
    Ok((num / den / e).powf((1.0 - alpha) / alpha))
}

/// Total mass at time `tau` of the subordinator with jump intensity
/// `x^(-1-alpha) exp(-x) dx`.
///
/// Exact accept-reject from stable proposals: the time is sliced so each
/// slice's stable proposal is accepted with probability `exp(-x)` at least
/// `1/e` on average, and accepted slice masses add up.
pub fn sample_tempered_stable_mass<R: Rng + ?Sized>(
    tau: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    // stable clock: untempered jumps with intensity tau x^(-1-alpha) total
    // a standard stable of "time" tau Gamma(1-alpha)/alpha
    let lg = statrs::function::gamma::gamma(1.0 - alpha);
    let stable_time = tau * lg / alpha;
    let slices = (stable_time.ceil() as usize).max(1);
    let slice_scale = (stable_time / slices as f64).powf(1.0 / alpha);
    const MAX_PROPOSALS: usize = 1_000_000;
    let mut total = 0.0;
    for _ in 0..slices {
        let mut accepted = false;
        for attempt in 0..MAX_PROPOSALS {
            let x = slice_scale * sample_stable(alpha, rng)?;
            if rng.gen::<f64>() < (-x).exp() {
                total += x;
                accepted = true;
                break;
            }
            if attempt + 1 == MAX_PROPOSALS {
                return Err(Error::Simulation {
                    step: attempt + 1,
                    msg: "tempered-stable proposal cap exhausted".into(),
                });
            }
        }
        debug_assert!(accepted);
    }
    Ok(total)
}

/// Joint masses of finitely many cells with base probabilities `cells`,
/// by normalizing independent tempered-stable cell masses run on a common
/// gamma-distributed clock.
///
/// Needs the two-parameter regime with `alpha > 0` and `theta > 0`; at
/// `alpha = 0` the masses are exactly Dirichlet distributed and are drawn
/// that way.
pub fn sample_cell_masses<R: Rng + ?Sized>(
    params: &PdParams,
    cells: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    let (alpha, theta) = match *params {
        PdParams::TwoParam { alpha, theta } => (alpha, theta),
        PdParams::FiniteCase { .. } => {
            return Err(Error::UnsupportedRegime(
                "cell masses via subordinators need the two-parameter regime".into(),
            ))
        }
    };
    if cells.len() < 2 {
        return Err(Error::Domain("need at least two cells".into()));
    }
    if cells.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::Domain("cell probabilities must be positive".into()));
    }
    let total: f64 = cells.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "cell probabilities must sum to 1, got {total}"
        )));
    }

    if alpha == 0.0 {
        // Dirichlet(theta p_1, ..., theta p_K)
        let mut masses = Vec::with_capacity(cells.len());
        for &p in cells {
            let g = Gamma::new(theta * p, 1.0)
                .map_err(|e| Error::Domain(format!("invalid gamma shape: {e}")))?;
            masses.push(g.sample(rng));
        }
        let sum: f64 = masses.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::Numeric("all cell masses underflowed to zero".into()));
        }
        for w in &mut masses {
            *w /= sum;
        }
        return Ok(masses);
    }
    if theta <= 0.0 {
        return Err(Error::UnsupportedRegime(
            "the gamma-clock construction needs theta > 0".into(),
        ));
    }

    let clock = Gamma::new(theta / alpha, 1.0)
        .map_err(|e| Error::Domain(format!("invalid gamma shape: {e}")))?
        .sample(rng);
    if !(clock > 0.0) {
        return Err(Error::Numeric("gamma clock underflowed to zero".into()));
    }
    let lg = statrs::function::gamma::gamma(1.0 - alpha);
    let mut masses = Vec::with_capacity(cells.len());
    for &p in cells {
        let tau = alpha * clock * p / lg;
        masses.push(sample_tempered_stable_mass(tau, alpha, rng)?);
    }
    let sum: f64 = masses.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::Numeric("all cell masses underflowed to zero".into()));
    }
    for w in &mut masses {
        *w /= sum;
    }
    Ok(masses)
}
