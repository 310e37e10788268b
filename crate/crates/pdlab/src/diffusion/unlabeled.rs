//! Euler time stepping for the unlabeled mass diffusion.
//!
//! The process moves countably many masses summing to one; any finite
//! simulation tracks the `capacity` largest and lumps the rest into dust.
//! Per step each tracked atom follows
//!
//! ```text
//! dx_i = -(alpha + theta x_i)/2 dt + sqrt(x_i) dB_i
//!        - x_i (sum_j sqrt(x_j) dB_j + sqrt(dust) dB_dust),
//! ```
//!
//! whose action on power sums reproduces the generator on symmetric
//! polynomials. The dust term in the shared noise makes the covariance of
//! the tracked atoms exactly x_i (delta_ij - x_j): without it every tracked
//! variance is short by order dust per unit time. The drift constantly
//! bleeds mass into dust (in the full process that mass lives in
//! ever-smaller atoms); new atoms re-nucleate from dust with stick-breaking
//! sizes so the tracked set stays a faithful picture above the pruning
//! threshold. Power sums of order two and higher are insensitive to how
//! finely the dust is resolved, which is what makes the truncation honest:
//! tuning knobs move only mass that those observables cannot see.
//!
//! An optional fitness term `selection * x_i * (x_i - phi_2)` tilts the
//! drift by the covariance gradient of `phi_2`; with strength zero the
//! arithmetic is byte-for-byte the neutral scheme.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::core::{tol, PdParams};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sampling::sample_ranked;

/// Simulation knobs; defaults suit unit-scale horizons.
#[derive(Debug, Clone, Copy)]
pub struct UnlabeledConfig {
    /// Euler step, at most [`tol::MAX_DT`].
    pub dt: f64,
    /// Tracked atom slots.
    pub capacity: usize,
    /// Atoms below this are merged into dust.
    pub prune_below: f64,
    /// Spawn new atoms while dust exceeds this.
    pub dust_target: f64,
    /// Bound on nucleations per step.
    pub max_spawns_per_step: usize,
    /// Strength of the quadratic fitness tilt; zero is neutral.
    pub selection: f64,
}

impl Default for UnlabeledConfig {
    fn default() -> Self {
        UnlabeledConfig {
            dt: 1e-3,
            capacity: 256,
            prune_below: 1e-10,
            dust_target: 1e-3,
            max_spawns_per_step: 64,
            selection: 0.0,
        }
    }
}

impl UnlabeledConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= tol::MAX_DT) {
            return Err(Error::Domain(format!(
                "dt must lie in (0, {}], got {}",
                tol::MAX_DT,
                self.dt
            )));
        }
        if self.capacity < 8 {
            return Err(Error::Domain("capacity must be at least 8".into()));
        }
        if !(self.prune_below > 0.0 && self.prune_below < 1e-3) {
            return Err(Error::Domain("prune_below must lie in (0, 1e-3)".into()));
        }
        if !(self.dust_target >= self.prune_below && self.dust_target <= 0.1) {
            return Err(Error::Domain(
                "dust_target must lie in [prune_below, 0.1]".into(),
            ));
        }
        if !self.selection.is_finite() {
            return Err(Error::Domain("selection must be finite".into()));
        }
        Ok(())
    }
}

/// Truncated unlabeled diffusion state: tracked atoms plus dust.
pub struct UnlabeledDiffusion {
    params: PdParams,
    cfg: UnlabeledConfig,
    atoms: Vec<f64>,
    time: f64,
    steps: usize,
    noise: Vec<f64>,
}

impl UnlabeledDiffusion {
    /// Start from explicit masses (any order); the shortfall from one is
    /// dust. For the finite regime the capacity is clamped to the atom
    /// count.
    pub fn new(params: &PdParams, init: &[f64], cfg: UnlabeledConfig) -> Result<Self> {
        cfg.validate()?;
        let mut cfg = cfg;
        if let PdParams::FiniteCase { m, .. } = params {
            cfg.capacity = cfg.capacity.min(*m as usize);
        }
        if init.is_empty() || init.len() > cfg.capacity {
            return Err(Error::Domain(format!(
                "initial state needs 1..={} atoms, got {}",
                cfg.capacity,
                init.len()
            )));
        }
        let mut sum = 0.0;
        for &x in init {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::Domain("initial masses must be nonnegative".into()));
            }
            sum += x;
        }
        if sum > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "initial masses sum to {sum}, must not exceed 1"
            )));
        }
        let atoms: Vec<f64> = init.iter().copied().filter(|&x| x > 0.0).collect();
        if atoms.is_empty() {
            return Err(Error::Domain("initial state must carry some mass".into()));
        }
        Ok(UnlabeledDiffusion {
            params: *params,
            cfg,
            atoms,
            time: 0.0,
            steps: 0,
            noise: Vec::new(),
        })
    }

    /// Start from a draw of the stationary ranked weights.
    pub fn from_stationary(
        params: &PdParams,
        cfg: UnlabeledConfig,
        rng: &mut (impl Rng + ?Sized),
    ) -> Result<Self> {
        let ranked = sample_ranked(params, cfg.capacity, rng)?;
        let keep: Vec<f64> = ranked
            .weights()
            .iter()
            .copied()
            .filter(|&x| x > cfg.prune_below)
            .collect();
        Self::new(params, &keep, cfg)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn dust(&self) -> f64 {
        (1.0 - self.atoms.iter().sum::<f64>()).max(0.0)
    }

    /// Power sum of the tracked atoms; dust contributes nothing, which is
    /// exact in the limit of full resolution for orders two and up.
    pub fn power_sum(&self, order: u32) -> f64 {
        self.atoms.iter().map(|&x| x.powi(order as i32)).sum()
    }

    /// Ranked snapshot of the tracked atoms.
    pub fn ranked_state(&self) -> Result<crate::core::RankedWeights> {
        crate::core::RankedWeights::from_unsorted(self.atoms.clone(), self.dust())
    }

    /// Nucleate atoms out of dust with stick-breaking sizes.
    fn spawn(&mut self, rng: &mut (impl Rng + ?Sized)) -> Result<()> {
        let alpha = self.params.alpha();
        let theta = self.params.theta();
        let mut dust = 1.0 - self.atoms.iter().sum::<f64>();
        let mut spawned = 0;
        while dust > self.cfg.dust_target
            && spawned < self.cfg.max_spawns_per_step
            && self.atoms.len() < self.cfg.capacity
        {
            let b = theta + alpha * self.atoms.len() as f64;
            let frac = if b > 0.0 {
                let beta = Beta::new(1.0 - alpha, b)
                    .map_err(|e| Error::Domain(format!("stick law: {e}")))?;
                beta.sample(rng)
            } else {
                // finite regime, final slot: the stick takes everything
                1.0
            };
            let atom = dust * frac;
            if atom < self.cfg.prune_below {
                break;
            }
            self.atoms.push(atom);
            dust -= atom;
            spawned += 1;
        }
        Ok(())
    }

    /// One Euler step.
    pub fn step(&mut self, rng: &mut (impl Rng + ?Sized)) -> Result<()> {
        self.spawn(rng)?;
        let dt = self.cfg.dt;
        let sqrt_dt = dt.sqrt();
        let alpha = self.params.alpha();
        let theta = self.params.theta();
        let sel = self.cfg.selection;
        let phi2: f64 = self.atoms.iter().map(|&x| x * x).sum();

        self.noise.clear();
        let mut shared = 0.0;
        let mut tracked = 0.0;
        for &x in &self.atoms {
            let g: f64 = rng.sample::<f64, _>(StandardNormal) * sqrt_dt;
            shared += x.sqrt() * g;
            tracked += x;
            self.noise.push(g);
        }
        let g_dust: f64 = rng.sample::<f64, _>(StandardNormal) * sqrt_dt;
        shared += (1.0 - tracked).max(0.0).sqrt() * g_dust;

        let mut sum = 0.0;
        let mut write = 0;
        for read in 0..self.atoms.len() {
            let x = self.atoms[read];
            let drift = -0.5 * (alpha + theta * x) + sel * x * (x - phi2);
            let next = x + drift * dt + x.sqrt() * self.noise[read] - x * shared;
            if next >= self.cfg.prune_below {
                self.atoms[write] = next;
                sum += next;
                write += 1;
            }
        }
        self.atoms.truncate(write);
        if self.atoms.is_empty() {
            return Err(Error::Simulation {
                step: self.steps,
                msg: "all atoms extinguished; decrease dt or raise capacity".into(),
            });
        }
        // Atoms killed mid-overshoot leave their unabsorbed negative mass
        // behind; normally dust pays for it, but when dust is empty the
        // kept sum lands past one. Debit exactly the excess from the
        // smallest atoms, where the phantom mass originated. Scaling the
        // bulk instead would tax every large atom and bias all power sums
        // downward by order dt per event.
        while sum > 1.0 && self.atoms.len() > 1 {
            let mut min_idx = 0;
            for i in 1..self.atoms.len() {
                if self.atoms[i] < self.atoms[min_idx] {
                    min_idx = i;
                }
            }
            let debt = sum - 1.0;
            if self.atoms[min_idx] <= debt + self.cfg.prune_below {
                sum -= self.atoms[min_idx];
                self.atoms.swap_remove(min_idx);
            } else {
                self.atoms[min_idx] -= debt;
                sum = 1.0;
            }
        }
        if sum > 1.0 {
            self.atoms[0] = 1.0;
        }
        self.time += dt;
        self.steps += 1;
        Ok(())
    }

    /// Advance by `horizon`, rounded to whole steps.
    pub fn run(&mut self, horizon: f64, rng: &mut (impl Rng + ?Sized)) -> Result<()> {
        if !(horizon >= 0.0) {
            return Err(Error::Domain(format!("bad horizon {horizon}")));
        }
        let n = (horizon / self.cfg.dt).round() as u64;
        for _ in 0..n {
            self.step(rng)?;
        }
        Ok(())
    }
}

/// Per-atom drift increment produced by the squared fitness `exp(c phi_2)`:
/// half the mutation-free covariance `a_ij = x_i (delta_ij - x_j)` applied
/// to the gradient `2 c x`, which collapses to `c x_i (x_i - phi_2)`. This
/// is exactly the term [`UnlabeledDiffusion::step`] adds when
/// `cfg.selection = c`.
pub fn quadratic_fitness_increment(atoms: &[f64], c: f64) -> Vec<f64> {
    let phi2: f64 = atoms.iter().map(|&x| x * x).sum();
    atoms.iter().map(|&x| c * x * (x - phi2)).collect()
}

/// Ensemble averages of power sums along a common schedule.
#[derive(Debug, Clone)]
pub struct MomentCurve {
    pub checkpoints: Vec<f64>,
    pub orders: Vec<u32>,
    /// `mean[c][o]` over paths at `checkpoints[c]` for `orders[o]`.
    pub mean: Vec<Vec<f64>>,
    /// Matching standard errors.
    pub se: Vec<Vec<f64>>,
}

/// Run `paths` independent copies from the same initial masses and average
/// the requested power sums at each checkpoint. Deterministic in `seed`
/// regardless of thread count: path `i` uses stream `i`.
pub fn ensemble_power_moments(
    params: &PdParams,
    cfg: UnlabeledConfig,
    init: &[f64],
    checkpoints: &[f64],
    orders: &[u32],
    paths: usize,
    seed: u64,
) -> Result<MomentCurve> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "checkpoints must be strictly increasing and nonempty".into(),
        ));
    }
    if checkpoints[0] < 0.0 {
        return Err(Error::Domain("checkpoints must be nonnegative".into()));
    }
    if orders.is_empty() || orders.iter().any(|&m| m < 2) {
        return Err(Error::Domain("orders must all be at least 2".into()));
    }
    if paths == 0 {
        return Err(Error::Domain("need at least one path".into()));
    }
    let per_path: Vec<Vec<Vec<f64>>> = (0..paths)
        .into_par_iter()
        .map(|i| -> Result<Vec<Vec<f64>>> {
            let mut rng = RngStream::new(seed, i as u64).rng();
            let mut sim = UnlabeledDiffusion::new(params, init, cfg)?;
            let mut rows = Vec::with_capacity(checkpoints.len());
            for &t in checkpoints {
                sim.run(t - sim.time(), &mut rng)?;
                rows.push(orders.iter().map(|&m| sim.power_sum(m)).collect());
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    let nc = checkpoints.len();
    let no = orders.len();
    let mut mean = vec![vec![0.0; no]; nc];
    let mut se = vec![vec![0.0; no]; nc];
    for c in 0..nc {
        for o in 0..no {
            let vals: Vec<f64> = per_path.iter().map(|p| p[c][o]).collect();
            let m = vals.iter().sum::<f64>() / paths as f64;
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
                / (paths.max(2) - 1) as f64;
            mean[c][o] = m;
            se[c][o] = (var / paths as f64).sqrt();
        }
    }
    Ok(MomentCurve {
        checkpoints: checkpoints.to_vec(),
        orders: orders.to_vec(),
        mean,
        se,
    })
}

/// Draw near-stationary `phi_2` samples: independent paths start from the
/// neutral stationary law and relax under the configured dynamics for
/// `burn_in` time units. One sample per path, stream `i` for path `i`.
pub fn ensemble_stationary_phi2(
    params: &PdParams,
    cfg: UnlabeledConfig,
    burn_in: f64,
    paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(burn_in > 0.0) {
        return Err(Error::Domain("burn_in must be positive".into()));
    }
    if paths == 0 {
        return Err(Error::Domain("need at least one path".into()));
    }
    (0..paths)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = RngStream::new(seed, i as u64).rng();
            let mut sim = UnlabeledDiffusion::from_stationary(params, cfg, &mut rng)?;
            sim.run(burn_in, &mut rng)?;
            Ok(sim.power_sum(2))
        })
        .collect()
}
