//! One-dimensional diffusion for the mass of a two-cell split.
//!
//! The cell mass follows `dx = b(x) dt + sqrt(x (1 - x)) dW` with the drift
//! from [`crate::density::two_type_drift`]. For `theta > 0` each drift
//! evaluation costs a quadrature, so the simulator interpolates a table on
//! a boundary-clustered grid; the drift approaches `(theta + alpha)/2` and
//! its negative at the endpoints, which extends the table analytically into
//! the unvisited slivers. Paths reflect at a hair's width from the
//! boundary: the true process never touches it, but Euler increments can
//! overshoot.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::core::tol;
use crate::density::{two_type_drift, TwoTypeParams};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Reflection barrier distance from each boundary.
const REFLECT_AT: f64 = 1e-6;
/// Interior drift-table span; outside it the boundary limit takes over.
const TABLE_EDGE: f64 = 1e-4;
const TABLE_POINTS: usize = 4097;

enum Drift {
    /// Closed-form log-derivative, cheap enough to call every step.
    Direct(TwoTypeParams),
    /// Interpolation on a cos-clustered grid with analytic endcaps.
    Table {
        grid: Vec<f64>,
        values: Vec<f64>,
        boundary: f64,
    },
}

impl Drift {
    fn build(tp: &TwoTypeParams) -> Result<Self> {
        if tp.theta() == 0.0 {
            return Ok(Drift::Direct(*tp));
        }
        let lo = TABLE_EDGE;
        let hi = 1.0 - TABLE_EDGE;
        let n = TABLE_POINTS - 1;
        let grid: Vec<f64> = (0..=n)
            .map(|j| {
                lo + (hi - lo) * 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos())
            })
            .collect();
        let values: Vec<f64> = grid
            .par_iter()
            .map(|&x| two_type_drift(tp, x))
            .collect::<Result<_>>()?;
        Ok(Drift::Table {
            grid,
            values,
            boundary: 0.5 * (tp.theta() + tp.alpha()),
        })
    }

    fn at(&self, x: f64) -> Result<f64> {
        match self {
            Drift::Direct(tp) => two_type_drift(tp, x),
            Drift::Table {
                grid,
                values,
                boundary,
            } => {
                let n = grid.len();
                if x <= grid[0] {
                    let t = x / grid[0];
                    return Ok(*boundary + t * (values[0] - *boundary));
                }
                if x >= grid[n - 1] {
                    let t = (1.0 - x) / (1.0 - grid[n - 1]);
                    return Ok(-*boundary + t * (values[n - 1] + *boundary));
                }
                let hi = grid.partition_point(|&g| g < x);
                let (a, b) = (grid[hi - 1], grid[hi]);
                let t = (x - a) / (b - a);
                Ok(values[hi - 1] + t * (values[hi] - values[hi - 1]))
            }
        }
    }
}

/// Euler scheme for the two-cell mass on `(0, 1)`.
pub struct TwoTypeDiffusion {
    tp: TwoTypeParams,
    drift: Drift,
    tilt: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
    dt: f64,
    x: f64,
    time: f64,
}

impl TwoTypeDiffusion {
    /// Start at `x0`; for `theta > 0` this precomputes the drift table,
    /// which dominates construction cost. Clone-cheap stepping afterwards.
    pub fn new(tp: &TwoTypeParams, dt: f64, x0: f64) -> Result<Self> {
        if !(dt > 0.0 && dt <= tol::MAX_DT) {
            return Err(Error::Domain(format!(
                "dt must lie in (0, {}], got {dt}",
                tol::MAX_DT
            )));
        }
        if !(x0 > 0.0 && x0 < 1.0) {
            return Err(Error::Domain(format!("x0 must lie in (0, 1), got {x0}")));
        }
        Ok(TwoTypeDiffusion {
            tp: *tp,
            drift: Drift::build(tp)?,
            tilt: None,
            dt,
            x: x0,
            time: 0.0,
        })
    }

    /// Like [`Self::new`] with a fitness perturbation: `grad_log_fitness`
    /// is the derivative of the log squared fitness, folded into the drift
    /// as `a(x) grad / 2` with `a(x) = x(1 - x)`. The stationary law under
    /// this drift is the fitness-weighted neutral law.
    pub fn with_selection(
        tp: &TwoTypeParams,
        dt: f64,
        x0: f64,
        grad_log_fitness: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let mut sim = Self::new(tp, dt, x0)?;
        sim.tilt = Some(Box::new(grad_log_fitness));
        Ok(sim)
    }

    pub fn position(&self) -> f64 {
        self.x
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn params(&self) -> &TwoTypeParams {
        &self.tp
    }

    /// Drift at `x` as the simulator sees it: table-interpolated when a
    /// table is in use, plus any selection term.
    pub fn drift_at(&self, x: f64) -> Result<f64> {
        let base = self.drift.at(x)?;
        Ok(match &self.tilt {
            Some(g) => base + 0.5 * x * (1.0 - x) * g(x),
            None => base,
        })
    }

    /// Restart the path at `x0` without rebuilding the drift table.
    pub fn restart(&mut self, x0: f64) -> Result<()> {
        if !(x0 > 0.0 && x0 < 1.0) {
            return Err(Error::Domain(format!("x0 must lie in (0, 1), got {x0}")));
        }
        self.x = x0;
        self.time = 0.0;
        Ok(())
    }

    pub fn step(&mut self, rng: &mut (impl Rng + ?Sized)) -> Result<()> {
        let b = self.drift_at(self.x)?;
        let g: f64 = rng.sample(StandardNormal);
        let mut next =
            self.x + b * self.dt + (self.x * (1.0 - self.x)).sqrt() * self.dt.sqrt() * g;
        // reflect overshoots back into the open interval
        for _ in 0..4 {
            if next < REFLECT_AT {
                next = 2.0 * REFLECT_AT - next;
            } else if next > 1.0 - REFLECT_AT {
                next = 2.0 * (1.0 - REFLECT_AT) - next;
            } else {
                break;
            }
        }
        self.x = next.clamp(REFLECT_AT, 1.0 - REFLECT_AT);
        self.time += self.dt;
        Ok(())
    }

    pub fn run(&mut self, horizon: f64, rng: &mut (impl Rng + ?Sized)) -> Result<()> {
        if !(horizon >= 0.0) {
            return Err(Error::Domain(format!("bad horizon {horizon}")));
        }
        let n = (horizon / self.dt).round() as u64;
        for _ in 0..n {
            self.step(rng)?;
        }
        Ok(())
    }
}

/// Independent near-stationary samples of the cell mass: paths start at the
/// cell weight `p`, relax for `burn_in`, and report their endpoint. The
/// drift table is built once and shared. Deterministic in `seed`.
pub fn ensemble_stationary_positions(
    tp: &TwoTypeParams,
    dt: f64,
    burn_in: f64,
    paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    relax_ensemble(tp, dt, burn_in, paths, seed, None)
}

/// Same relaxation with the selection drift `a(x) grad_log_fitness(x) / 2`
/// added; endpoints sample the fitness-weighted stationary law.
pub fn ensemble_selected_positions(
    tp: &TwoTypeParams,
    dt: f64,
    burn_in: f64,
    paths: usize,
    seed: u64,
    grad_log_fitness: impl Fn(f64) -> f64 + Sync,
) -> Result<Vec<f64>> {
    relax_ensemble(tp, dt, burn_in, paths, seed, Some(&grad_log_fitness))
}

fn relax_ensemble(
    tp: &TwoTypeParams,
    dt: f64,
    burn_in: f64,
    paths: usize,
    seed: u64,
    tilt: Option<&(dyn Fn(f64) -> f64 + Sync)>,
) -> Result<Vec<f64>> {
    if paths == 0 {
        return Err(Error::Domain("need at least one path".into()));
    }
    if !(burn_in > 0.0) {
        return Err(Error::Domain("burn_in must be positive".into()));
    }
    let proto = TwoTypeDiffusion::new(tp, dt, tp.p())?;
    let drift = &proto.drift;
    (0..paths)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = RngStream::new(seed, i as u64).rng();
            let mut x = tp.p();
            let steps = (burn_in / dt).round() as u64;
            for _ in 0..steps {
                let mut b = drift.at(x)?;
                if let Some(g) = tilt {
                    b += 0.5 * x * (1.0 - x) * g(x);
                }
                let gauss: f64 = rng.sample(StandardNormal);
                let mut next = x + b * dt + (x * (1.0 - x)).sqrt() * dt.sqrt() * gauss;
                for _ in 0..4 {
                    if next < REFLECT_AT {
                        next = 2.0 * REFLECT_AT - next;
                    } else if next > 1.0 - REFLECT_AT {
                        next = 2.0 * (1.0 - REFLECT_AT) - next;
                    } else {
                        break;
                    }
                }
                x = next.clamp(REFLECT_AT, 1.0 - REFLECT_AT);
            }
            Ok(x)
        })
        .collect()
}
