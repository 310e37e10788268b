//! Self-check suites pinning the layers of the crate against each other.
//!
//! Each suite bundles one family of consistency checks into a [`Report`]:
//! exact combinatorial identities at tight tolerances, quadrature against
//! closed forms, and seeded Monte Carlo against exact expectations at
//! 3-sigma or distribution tests at the 1% level. Suites are deterministic
//! in their seed, so a configuration that passes keeps passing.
//!
//! The same functions back the `verify` command line and the acceptance
//! test; sizes below the defaults are for quick smoke runs only.

use serde::Serialize;

use crate::core::PdParams;
use crate::density::{
    two_type_density, two_type_density_with_tol, two_type_drift, RankedTail, TwoTypeCdf,
    TwoTypeParams,
};
use crate::diffusion::{
    ensemble_power_moments, ensemble_selected_positions, ensemble_stationary_positions,
    TwoTypeDiffusion, UnlabeledConfig, UpDownChain,
};
use crate::error::{Error, Result};
use crate::partitions::{
    enumerate_partitions, epsf_probability, expected_block_count,
    expected_block_count_by_enumeration, partition_count, IntegerPartition,
};
use crate::powersum::{
    decay_rate, dirichlet_form, generator_matrix, moment_flow, pd_expectation, spectrum,
    stationary_mean_residual, Monomial, PowerSumPoly,
};
use crate::rng::RngStream;
use crate::sampling::sample_ranked;
use crate::stats::{chi_square_critical, chi_square_statistic, ks_critical, ks_statistic};
use rayon::prelude::*;

/// Draws per parameter point in [`moments_mc_suite`].
pub const DEFAULT_MOMENT_DRAWS: usize = 100_000;
/// Paths per configuration in [`diffusion_ode_suite`].
pub const DEFAULT_ODE_PATHS: usize = 10_000;
/// Chain steps in [`updown_suite`].
pub const DEFAULT_UPDOWN_STEPS: u64 = 1_000_000;
/// Paths per distribution test in [`two_type_suite`].
pub const DEFAULT_TWO_TYPE_PATHS: usize = 2_000;
/// Draws per parameter point in [`ranked_marginal_suite`].
pub const DEFAULT_MARGINAL_DRAWS: usize = 5_000;
/// Paths for the tilted ensemble in [`selection_suite`].
pub const DEFAULT_SELECTION_PATHS: usize = 2_000;

/// One named comparison. `pass` is `abs_err <= tol` for value checks and
/// `actual < tol` for test statistics (where `tol` holds the critical
/// value); non-finite actuals always fail.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// Size index of the worst case, when the check sweeps over sizes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    pub expected: f64,
    pub actual: f64,
    pub abs_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, actual: f64, expected: f64, tol: f64) -> Self {
        let abs_err = (actual - expected).abs();
        Check {
            name: name.into(),
            n: None,
            expected,
            actual,
            abs_err,
            tol,
            pass: actual.is_finite() && abs_err <= tol,
        }
    }

    /// A test statistic compared against its critical value.
    pub fn statistic(name: impl Into<String>, stat: f64, critical: f64) -> Self {
        Check {
            name: name.into(),
            n: None,
            expected: 0.0,
            actual: stat,
            abs_err: stat,
            tol: critical,
            pass: stat.is_finite() && stat < critical,
        }
    }

    fn at_n(mut self, n: u64) -> Self {
        self.n = Some(n);
        self
    }
}

/// A suite outcome: all checks plus the conjunction.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl Report {
    fn from_checks(suite: &str, seed: Option<u64>, checks: Vec<Check>) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        Report {
            suite: suite.into(),
            seed,
            pass,
            checks,
        }
    }

    /// The check with the largest error-to-tolerance ratio, for summaries.
    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().max_by(|a, b| {
            let ra = a.abs_err / a.tol.max(f64::MIN_POSITIVE);
            let rb = b.abs_err / b.tol.max(f64::MIN_POSITIVE);
            ra.partial_cmp(&rb).unwrap_or(std::cmp::Ordering::Equal)
        })
    }
}

fn label(params: &PdParams) -> String {
    format!("alpha={}, theta={}", params.alpha(), params.theta())
}

/// The shared parameter grid: discounts {0, 0.3, 0.5, 0.8} crossed with
/// strengths {-alpha/2, 0, 0.5, 2}, keeping the valid combinations.
pub fn parameter_grid() -> Vec<PdParams> {
    let mut out = Vec::new();
    for &alpha in &[0.0, 0.3, 0.5, 0.8] {
        for &theta in &[-alpha / 2.0, 0.0, 0.5, 2.0] {
            if let Ok(p) = PdParams::new_two_param(alpha, theta) {
                out.push(p);
            }
        }
    }
    out
}

/// Partition-law normalization: the exchangeable block-size probabilities
/// sum to one at every size up to 20, across the parameter grid.
pub fn epsf_suite() -> Result<Report> {
    let mut checks = Vec::new();
    for params in parameter_grid() {
        let mut worst_total = 1.0;
        let mut worst_err = -1.0;
        let mut worst_n = 0;
        for n in 1..=20u32 {
            let mut total = 0.0;
            for p in enumerate_partitions(n)? {
                total += epsf_probability(&params, &p)?;
            }
            let err = (total - 1.0).abs();
            if err > worst_err {
                worst_err = err;
                worst_total = total;
                worst_n = n;
            }
        }
        checks.push(
            Check::within(
                format!("partition law total mass, n <= 20 ({})", label(&params)),
                worst_total,
                1.0,
                1e-10,
            )
            .at_n(u64::from(worst_n)),
        );
    }
    Ok(Report::from_checks("epsf", None, checks))
}

/// Block-count identity: the enumerated mean block count equals the closed
/// form built from the singleton probability, and the closed form grows
/// like the power law it should.
pub fn aux_identity_suite() -> Result<Report> {
    let mut checks = Vec::new();
    let points = [
        PdParams::new_two_param(0.5, 0.5)?,
        PdParams::new_two_param(0.3, -0.1)?,
        PdParams::new_two_param(0.0, 1.0)?,
    ];
    for params in &points {
        let mut worst_err = -1.0;
        let mut worst = (0.0, 0.0, 0u32);
        for n in 1..=40u32 {
            let lhs = expected_block_count_by_enumeration(params, n)?;
            let rhs = expected_block_count(params, n)?;
            let err = (lhs - rhs).abs();
            if err > worst_err {
                worst_err = err;
                worst = (lhs, rhs, n);
            }
        }
        checks.push(
            Check::within(
                format!("mean block count, enumerated vs closed form, n <= 40 ({})", label(params)),
                worst.0,
                worst.1,
                1e-8,
            )
            .at_n(u64::from(worst.2)),
        );
    }
    // growth: the closed form divided by n^alpha stays within a factor two
    // across n = 1e2 .. 1e5 at (0.5, 0.5)
    let params = PdParams::new_two_param(0.5, 0.5)?;
    let mut ratios = Vec::new();
    for &n in &[100u32, 1_000, 10_000, 100_000] {
        ratios.push(expected_block_count(&params, n)? / f64::from(n).powf(params.alpha()));
    }
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    checks.push(
        Check::within(
            "block count growth: spread of E[blocks]/n^alpha over n in 1e2..1e5 (alpha=0.5, theta=0.5)",
            max / min,
            1.0,
            1.0,
        )
        .at_n(100_000),
    );
    Ok(Report::from_checks("aux-identity", None, checks))
}

fn monomials_of_degree_at_most(max_degree: u32) -> Result<Vec<Monomial>> {
    let mut out = Vec::new();
    for d in 2..=max_degree {
        for p in enumerate_partitions(d)? {
            if p.parts().iter().all(|&k| k >= 2) {
                out.push(Monomial::new(p.parts().to_vec())?);
            }
        }
    }
    Ok(out)
}

fn monomial_name(m: &Monomial) -> String {
    if m.is_constant() {
        return "1".into();
    }
    let mut pieces: Vec<String> = Vec::new();
    let mut orders = m.orders().to_vec();
    orders.reverse(); // ascending reads better
    let mut i = 0;
    while i < orders.len() {
        let k = orders[i];
        let count = orders[i..].iter().take_while(|&&v| v == k).count();
        if count == 1 {
            pieces.push(format!("phi{k}"));
        } else {
            pieces.push(format!("phi{k}^{count}"));
        }
        i += count;
    }
    pieces.join(" ")
}

/// Generator identities at stationarity: every monomial of degree at most 6
/// has zero stationary mean under the generator, and the energy form is
/// symmetric on all pairs.
pub fn generator_suite() -> Result<Report> {
    let monos = monomials_of_degree_at_most(6)?;
    let mut checks = Vec::new();
    for params in parameter_grid() {
        let mut worst_mean = 0.0_f64;
        for m in &monos {
            let poly = PowerSumPoly::monomial(m.clone(), 1.0);
            let r = stationary_mean_residual(&params, &poly)?;
            worst_mean = worst_mean.max(r);
        }
        checks.push(Check::within(
            format!("stationary mean of generator images, degree <= 6 ({})", label(&params)),
            worst_mean,
            0.0,
            1e-10,
        ));
        let mut worst_sym = 0.0_f64;
        for (i, u) in monos.iter().enumerate() {
            let pu = PowerSumPoly::monomial(u.clone(), 1.0);
            for v in monos.iter().skip(i + 1) {
                let pv = PowerSumPoly::monomial(v.clone(), 1.0);
                let uv = dirichlet_form(&params, &pu, &pv)?;
                let vu = dirichlet_form(&params, &pv, &pu)?;
                worst_sym = worst_sym.max((uv - vu).abs());
            }
        }
        checks.push(Check::within(
            format!("energy form symmetry, degree <= 6 ({})", label(&params)),
            worst_sym,
            0.0,
            1e-10,
        ));
    }
    Ok(Report::from_checks("generator", None, checks))
}

/// Spectral contract: triangular action with the advertised diagonal,
/// multiplicities counting unit-free partitions, and no discount
/// dependence.
pub fn spectrum_suite() -> Result<Report> {
    let mut checks = Vec::new();
    let max_degree = 8u32;
    for &theta in &[0.5, 1.0, 2.0] {
        let params = PdParams::new_two_param(0.2, theta)?;
        let (basis, matrix) = generator_matrix(&params, max_degree)?;
        // triangularity: a degree d monomial maps into degree <= d
        let mut above = 0.0_f64;
        for (j, mono) in basis.iter().enumerate() {
            for (i, target) in basis.iter().enumerate() {
                if target.degree() > mono.degree() {
                    above = above.max(matrix[i][j].abs());
                }
            }
        }
        checks.push(Check::within(
            format!("no degree-raising terms (theta={theta})"),
            above,
            0.0,
            0.0,
        ));
        // diagonal entries realize the closed-form decay rates
        let mut worst_diag = 0.0_f64;
        for (j, mono) in basis.iter().enumerate() {
            let want = if mono.is_constant() {
                0.0
            } else {
                -decay_rate(theta, mono.degree())
            };
            worst_diag = worst_diag.max((matrix[j][j] - want).abs());
        }
        checks.push(Check::within(
            format!("diagonal matches -m(m - 1 + theta)/2 (theta={theta})"),
            worst_diag,
            0.0,
            1e-12,
        ));
        // reported spectrum: eigenvalues with unit-free partition counts
        let lines = spectrum(&params, max_degree)?;
        let mut mult_mismatch = 0u64;
        let mut eig_err = 0.0_f64;
        for (idx, line) in lines.iter().enumerate() {
            let (want_eig, want_mult) = if idx == 0 {
                (0.0, 1)
            } else {
                let m = idx as u32 + 1;
                (
                    -decay_rate(theta, m),
                    partition_count(m)? - partition_count(m - 1)?,
                )
            };
            eig_err = eig_err.max((line.eigenvalue - want_eig).abs());
            if line.multiplicity != want_mult {
                mult_mismatch += 1;
            }
        }
        checks.push(Check::within(
            format!("reported eigenvalues (theta={theta})"),
            eig_err,
            0.0,
            0.0,
        ));
        checks.push(Check::within(
            format!("multiplicities count unit-free partitions (theta={theta})"),
            mult_mismatch as f64,
            0.0,
            0.0,
        ));
        // discount independence of the whole spectral picture
        let other = PdParams::new_two_param(0.7, theta)?;
        let lines_b = spectrum(&other, max_degree)?;
        let mut diff = 0.0_f64;
        for (a, b) in lines.iter().zip(&lines_b) {
            diff = diff.max((a.eigenvalue - b.eigenvalue).abs());
            if a.multiplicity != b.multiplicity {
                diff = f64::INFINITY;
            }
        }
        let (_, matrix_b) = generator_matrix(&PdParams::new_two_param(0.7, theta)?, max_degree)?;
        let mut diag_diff = 0.0_f64;
        for j in 0..basis.len() {
            diag_diff = diag_diff.max((matrix[j][j] - matrix_b[j][j]).abs());
        }
        checks.push(Check::within(
            format!("discount invariance across alpha 0.2 vs 0.7 (theta={theta})"),
            diff.max(diag_diff),
            0.0,
            1e-12,
        ));
    }
    Ok(Report::from_checks("spectrum", None, checks))
}

/// Exact stationary moments against the ranked stick-breaking sampler:
/// every monomial of degree at most 5 at four parameter points, plus one
/// closed-form anchor.
pub fn moments_mc_suite(draws: usize, seed: u64) -> Result<Report> {
    if draws < 100 {
        return Err(Error::Domain("need at least 100 draws".into()));
    }
    let monos = monomials_of_degree_at_most(5)?;
    let cases = [
        (PdParams::new_two_param(0.0, 1.0)?, 200usize),
        (PdParams::new_two_param(0.3, -0.1)?, 600),
        (PdParams::new_two_param(0.5, 0.5)?, 1_500),
        (PdParams::new_two_param(0.6, 1.5)?, 3_000),
    ];
    let mut checks = Vec::new();
    // Fixed chunks summed in index order: the combine tree depends only
    // on the draw count, never on work stealing, so equal seeds give
    // bit-equal reports at any thread count.
    const CHUNK: usize = 1024;
    for (case_idx, (params, truncation)) in cases.iter().enumerate() {
        let k = monos.len();
        let chunk_sums: Vec<(Vec<f64>, Vec<f64>)> = (0..draws.div_ceil(CHUNK))
            .into_par_iter()
            .map(|chunk| {
                let mut s = vec![0.0; k];
                let mut s2 = vec![0.0; k];
                for i in chunk * CHUNK..((chunk + 1) * CHUNK).min(draws) {
                    let mut rng =
                        RngStream::new(seed, (case_idx * draws + i) as u64).rng();
                    let x = sample_ranked(params, *truncation, &mut rng)
                        .expect("sampler accepts verified parameters");
                    for (j, m) in monos.iter().enumerate() {
                        let v = m.evaluate(&x);
                        s[j] += v;
                        s2[j] += v * v;
                    }
                }
                (s, s2)
            })
            .collect();
        let mut sums = vec![0.0; k];
        let mut sq_sums = vec![0.0; k];
        for (s, s2) in chunk_sums {
            for j in 0..k {
                sums[j] += s[j];
                sq_sums[j] += s2[j];
            }
        }
        for (j, m) in monos.iter().enumerate() {
            let mean = sums[j] / draws as f64;
            let var = (sq_sums[j] / draws as f64 - mean * mean).max(0.0);
            let se = (var / draws as f64).sqrt();
            let exact = pd_expectation(params, &PowerSumPoly::monomial(m.clone(), 1.0))?;
            checks.push(Check::within(
                format!("E[{}] sampler vs closed form ({})", monomial_name(m), label(params)),
                mean,
                exact,
                3.0 * se,
            ));
        }
    }
    let params = PdParams::new_two_param(0.5, 0.5)?;
    let phi2 = pd_expectation(&params, &PowerSumPoly::phi(2)?)?;
    checks.push(Check::within(
        "E[phi2] closed form at alpha=0.5, theta=0.5",
        phi2,
        1.0 / 3.0,
        1e-12,
    ));
    Ok(Report::from_checks("moments-mc", Some(seed), checks))
}

/// Ensemble power-sum means from the truncated unlabeled simulator against
/// the exact moment flow, from a single unit atom.
pub fn diffusion_ode_suite(paths: usize, seed: u64) -> Result<Report> {
    if paths < 100 {
        return Err(Error::Domain("need at least 100 paths".into()));
    }
    let cases: [(PdParams, Vec<f64>); 2] = [
        (
            PdParams::new_two_param(0.0, 1.0)?,
            vec![0.1, 0.2, 0.34657, 0.5, 1.0],
        ),
        (
            PdParams::new_two_param(0.5, 0.5)?,
            vec![0.05, 0.1, 0.2, 0.35, 0.5],
        ),
    ];
    let orders = [2u32, 3];
    let mut checks = Vec::new();
    for (case_idx, (params, checkpoints)) in cases.iter().enumerate() {
        // Step small enough that the Euler weak error sits well inside the
        // three-sigma band at the default path count.
        let cfg = UnlabeledConfig {
            dt: 2.5e-4,
            ..UnlabeledConfig::default()
        };
        let curve = ensemble_power_moments(
            params,
            cfg,
            &[1.0],
            checkpoints,
            &orders,
            paths,
            seed.wrapping_add(case_idx as u64),
        )?;
        for (c, &t) in checkpoints.iter().enumerate() {
            let exact = moment_flow(params, 3, &[1.0, 1.0], t)?;
            for (o, &order) in orders.iter().enumerate() {
                checks.push(Check::within(
                    format!(
                        "ensemble mean of phi{order} at t={t} ({})",
                        label(params)
                    ),
                    curve.mean[c][o],
                    exact[order as usize - 2],
                    3.0 * curve.se[c][o],
                ));
            }
        }
    }
    // anchor: from a unit atom at theta=1, alpha=0 the exact second moment
    // relaxes as 1/2 + exp(-2t)/2, which is 3/4 at t = ln(2)/2
    let params = PdParams::new_two_param(0.0, 1.0)?;
    let at = moment_flow(&params, 2, &[1.0], 0.5 * std::f64::consts::LN_2)?[0];
    checks.push(Check::within(
        "exact phi2 flow hits 3/4 at t = ln(2)/2 (alpha=0, theta=1)",
        at,
        0.75,
        1e-9,
    ));
    Ok(Report::from_checks("diffusion-ode", Some(seed), checks))
}

/// Reversibility of the grow-then-shrink partition chain: exact detailed
/// balance for sizes up to 8, and long-run occupation at size 5 against the
/// stationary law.
pub fn updown_suite(steps: u64, seed: u64) -> Result<Report> {
    if steps < 10_000 {
        return Err(Error::Domain("need at least 10_000 steps".into()));
    }
    let mut checks = Vec::new();
    let points = [
        PdParams::new_two_param(0.5, 0.5)?,
        PdParams::new_two_param(0.3, 2.0)?,
        PdParams::new_two_param(0.0, 1.0)?,
        PdParams::new_finite_case(1.0, 3)?,
    ];
    for params in &points {
        let mut worst = 0.0_f64;
        let mut worst_n = 0u32;
        for n in 2..=8u32 {
            let chain = UpDownChain::new(params, n)?;
            let (states, matrix) = chain.transition_matrix()?;
            let pi: Vec<f64> = states
                .iter()
                .map(|s| epsf_probability(params, s))
                .collect::<Result<_>>()?;
            for i in 0..states.len() {
                for j in 0..states.len() {
                    let gap = (pi[i] * matrix[i][j] - pi[j] * matrix[j][i]).abs();
                    if gap > worst {
                        worst = gap;
                        worst_n = n;
                    }
                }
            }
        }
        let name = match params {
            PdParams::FiniteCase { kappa, m } => {
                format!("detailed balance, n <= 8 (kappa={kappa}, m={m})")
            }
            _ => format!("detailed balance, n <= 8 ({})", label(params)),
        };
        checks.push(Check::within(name, worst, 0.0, 1e-12).at_n(u64::from(worst_n)));
    }
    // occupation test: tally every 25th state to damp autocorrelation, so
    // the chi-square statistic keeps its nominal null distribution
    let params = PdParams::new_two_param(0.5, 0.5)?;
    let n = 5u32;
    let chain = UpDownChain::new(&params, n)?;
    let states = enumerate_partitions(n)?;
    let index: std::collections::HashMap<&IntegerPartition, usize> =
        states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let probs: Vec<f64> = states
        .iter()
        .map(|s| epsf_probability(&params, s))
        .collect::<Result<_>>()?;
    let mut rng = RngStream::new(seed, 0).rng();
    let mut state = IntegerPartition::single_block(n)?;
    for _ in 0..1_000u32 {
        state = chain.step(&state, &mut rng)?;
    }
    let thin = 25u64;
    let mut counts = vec![0u64; states.len()];
    let mut tallied = 0u64;
    for s in 0..steps {
        state = chain.step(&state, &mut rng)?;
        if s % thin == 0 {
            counts[index[&state]] += 1;
            tallied += 1;
        }
    }
    let expected: Vec<f64> = probs.iter().map(|p| p * tallied as f64).collect();
    let stat = chi_square_statistic(&counts, &expected)?;
    let crit = chi_square_critical(states.len() - 1, 0.01)?;
    checks.push(
        Check::statistic(
            format!(
                "occupation chi-square at n=5, {steps} steps thinned by {thin} (alpha=0.5, theta=0.5)"
            ),
            stat,
            crit,
        )
        .at_n(steps),
    );
    Ok(Report::from_checks("updown-balance", Some(seed), checks))
}

/// Stationary two-cell law: arcsine specialization, normalization across
/// the parameter grid, simulated occupation, and pointwise zero flux.
pub fn two_type_suite(paths: usize, seed: u64) -> Result<Report> {
    if paths < 100 {
        return Err(Error::Domain("need at least 100 paths".into()));
    }
    let mut checks = Vec::new();
    // (i) arcsine specialization, pointwise
    let arcsine = TwoTypeParams::new(0.5, 0.0, 0.5)?;
    let mut worst = 0.0_f64;
    for i in 1..=19 {
        let x = f64::from(i) * 0.05;
        let want = 1.0 / (std::f64::consts::PI * (x * (1.0 - x)).sqrt());
        worst = worst.max((two_type_density(&arcsine, x)? - want).abs());
    }
    checks.push(Check::within(
        "arcsine specialization pointwise on [0.05, 0.95] (alpha=0.5, theta=0, p=0.5)",
        worst,
        0.0,
        1e-8,
    ));
    // (ii) normalization across the grid
    let mut combos = Vec::new();
    for &alpha in &[0.3, 0.5, 0.7] {
        for &theta in &[0.0, 0.5, 1.5] {
            for &p in &[0.3, 0.5] {
                combos.push(TwoTypeParams::new(alpha, theta, p)?);
            }
        }
    }
    let masses: Vec<Result<(TwoTypeParams, f64)>> = combos
        .par_iter()
        .map(|tp| Ok((*tp, TwoTypeCdf::new(tp, 128)?.total_mass())))
        .collect();
    for entry in masses {
        let (tp, mass) = entry?;
        checks.push(Check::within(
            format!(
                "density normalization (alpha={}, theta={}, p={})",
                tp.alpha(),
                tp.theta(),
                tp.p()
            ),
            mass,
            1.0,
            1e-4,
        ));
    }
    // (iii) simulator occupation against the density
    let arcsine_cdf = |x: f64| 2.0 / std::f64::consts::PI * x.max(0.0).sqrt().asin();
    let mut xs = ensemble_stationary_positions(&arcsine, 1e-3, 12.0, paths, seed)?;
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = ks_statistic(&xs, arcsine_cdf)?;
    checks.push(Check::statistic(
        format!("occupation KS, {paths} paths (alpha=0.5, theta=0, p=0.5)"),
        d,
        ks_critical(paths, 0.01)?,
    ));
    let skewed = TwoTypeParams::new(0.3, 1.5, 0.4)?;
    let table = TwoTypeCdf::new(&skewed, 256)?;
    let mut xs = ensemble_stationary_positions(&skewed, 1e-3, 12.0, paths, seed ^ 0x5eed)?;
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = ks_statistic(&xs, |x| table.cdf(x))?;
    checks.push(Check::statistic(
        format!("occupation KS, {paths} paths (alpha=0.3, theta=1.5, p=0.4)"),
        d,
        ks_critical(paths, 0.01)?,
    ));
    // (iv) stationary flux vanishes pointwise: b q = (x(1-x) q)' / 2
    for tp in [arcsine, skewed] {
        let mut worst = 0.0_f64;
        let h = 1e-4;
        for i in 1..=19 {
            let x = f64::from(i) * 0.05;
            let aq = |y: f64| -> Result<f64> {
                Ok(y * (1.0 - y) * two_type_density_with_tol(&tp, y, 1e-11)?)
            };
            let deriv = (aq(x + h)? - aq(x - h)?) / (2.0 * h);
            let flux = two_type_drift(&tp, x)? * two_type_density_with_tol(&tp, x, 1e-11)?
                - 0.5 * deriv;
            worst = worst.max(flux.abs());
        }
        checks.push(Check::within(
            format!(
                "stationary flux on [0.05, 0.95] (alpha={}, theta={}, p={})",
                tp.alpha(),
                tp.theta(),
                tp.p()
            ),
            worst,
            0.0,
            1e-5,
        ));
    }
    Ok(Report::from_checks("two-type-density", Some(seed), checks))
}

/// Largest-atom law: the size-1 marginal density integrated into a
/// distribution function against ranked stick-breaking draws.
pub fn ranked_marginal_suite(draws: usize, seed: u64) -> Result<Report> {
    if draws < 100 {
        return Err(Error::Domain("need at least 100 draws".into()));
    }
    let mut checks = Vec::new();
    let cases = [(0.5, 0.0), (0.3, 0.5)];
    for (case_idx, &(alpha, theta)) in cases.iter().enumerate() {
        let params = PdParams::new_two_param(alpha, theta)?;
        let tail = RankedTail::build(alpha, theta, 40.0)?;
        let mut xs: Vec<f64> = (0..draws)
            .into_par_iter()
            .map(|i| {
                let mut rng =
                    RngStream::new(seed, (case_idx * draws + i) as u64).rng();
                let x = sample_ranked(&params, 400, &mut rng)
                    .expect("sampler accepts verified parameters");
                x.weights()[0]
            })
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = ks_statistic(&xs, |x| tail.largest_atom_cdf(x))?;
        checks.push(Check::statistic(
            format!("largest atom KS, {draws} draws (alpha={alpha}, theta={theta})"),
            d,
            ks_critical(draws, 0.01)?,
        ));
    }
    Ok(Report::from_checks("ranked-marginal", Some(seed), checks))
}

/// Fitness tilting of the two-cell dynamics: exponential fitness
/// equilibrates to the reweighted law, and unit fitness is a bitwise no-op.
pub fn selection_suite(paths: usize, seed: u64) -> Result<Report> {
    if paths < 100 {
        return Err(Error::Domain("need at least 100 paths".into()));
    }
    let mut checks = Vec::new();
    // squared fitness e^x over the arcsine baseline
    let tp = TwoTypeParams::new(0.5, 0.0, 0.5)?;
    let table = TwoTypeCdf::with_weight(&tp, 256, f64::exp)?;
    let mut xs = ensemble_selected_positions(&tp, 1e-3, 12.0, paths, seed, |_| 1.0)?;
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = ks_statistic(&xs, |x| table.cdf(x))?;
    checks.push(Check::statistic(
        format!("tilted occupation KS vs exp-weighted law, {paths} paths (alpha=0.5, theta=0, p=0.5)"),
        d,
        ks_critical(paths, 0.01)?,
    ));
    // unit fitness must not change a single bit of the trajectory
    let base = TwoTypeParams::new(0.3, 0.7, 0.4)?;
    let mut plain = TwoTypeDiffusion::new(&base, 1e-3, 0.4)?;
    let mut tilted = TwoTypeDiffusion::with_selection(&base, 1e-3, 0.4, |_| 0.0)?;
    let mut rng_a = RngStream::new(seed, 1).rng();
    let mut rng_b = RngStream::new(seed, 1).rng();
    let mut max_gap = 0.0_f64;
    for _ in 0..5_000 {
        plain.step(&mut rng_a)?;
        tilted.step(&mut rng_b)?;
        let gap = (plain.position() - tilted.position()).abs();
        max_gap = max_gap.max(gap);
        if plain.position().to_bits() != tilted.position().to_bits() {
            max_gap = max_gap.max(f64::MIN_POSITIVE);
        }
    }
    checks.push(Check::within(
        "unit fitness reproduces the neutral path bit for bit, 5000 steps",
        max_gap,
        0.0,
        0.0,
    ));
    let a = ensemble_stationary_positions(&base, 1e-3, 0.5, 64, seed)?;
    let b = ensemble_selected_positions(&base, 1e-3, 0.5, 64, seed, |_| 0.0)?;
    let ensemble_gap = a
        .iter()
        .zip(&b)
        .map(|(u, v)| if u.to_bits() == v.to_bits() { 0.0 } else { (u - v).abs().max(f64::MIN_POSITIVE) })
        .fold(0.0_f64, f64::max);
    checks.push(Check::within(
        "unit fitness reproduces the neutral ensemble bit for bit, 64 paths",
        ensemble_gap,
        0.0,
        0.0,
    ));
    Ok(Report::from_checks("selection", Some(seed), checks))
}

/// Every suite at its default size, in criterion order.
pub fn all_suites(seed: u64) -> Result<Vec<Report>> {
    Ok(vec![
        epsf_suite()?,
        aux_identity_suite()?,
        generator_suite()?,
        spectrum_suite()?,
        moments_mc_suite(DEFAULT_MOMENT_DRAWS, seed)?,
        diffusion_ode_suite(DEFAULT_ODE_PATHS, seed)?,
        updown_suite(DEFAULT_UPDOWN_STEPS, seed)?,
        two_type_suite(DEFAULT_TWO_TYPE_PATHS, seed)?,
        ranked_marginal_suite(DEFAULT_MARGINAL_DRAWS, seed)?,
        selection_suite(DEFAULT_SELECTION_PATHS, seed)?,
    ])
}

/// Partition-mass identity at one parameter point, one check per size.
///
/// The grid-wide [`epsf_suite`] reports only the worst size per point; this
/// variant lists every size so the full table is visible.
pub fn epsf_point_suite(params: &PdParams, n_max: u32) -> Result<Report> {
    if n_max == 0 || n_max > 40 {
        return Err(Error::Domain(format!(
            "exhaustive partition sums need 1 <= n <= 40, got {n_max}"
        )));
    }
    let mut checks = Vec::new();
    for n in 1..=n_max {
        let mut total = 0.0;
        for p in enumerate_partitions(n)? {
            total += epsf_probability(params, &p)?;
        }
        checks.push(
            Check::within(
                format!("partition law total mass at n={n} ({})", label(params)),
                total,
                1.0,
                1e-10,
            )
            .at_n(u64::from(n)),
        );
    }
    Ok(Report::from_checks("epsf", None, checks))
}

/// Block-count identity at one parameter point, one check per size.
pub fn aux_identity_point_suite(params: &PdParams, n_max: u32) -> Result<Report> {
    if n_max == 0 || n_max > 45 {
        return Err(Error::Domain(format!(
            "exhaustive block counts need 1 <= n-max <= 45, got {n_max}"
        )));
    }
    let mut checks = Vec::new();
    for n in 1..=n_max {
        let lhs = expected_block_count_by_enumeration(params, n)?;
        let rhs = expected_block_count(params, n)?;
        checks.push(
            Check::within(
                format!(
                    "mean block count, enumerated vs closed form at n={n} ({})",
                    label(params)
                ),
                lhs,
                rhs,
                1e-8,
            )
            .at_n(u64::from(n)),
        );
    }
    Ok(Report::from_checks("aux-identity", None, checks))
}

/// Generator identities at one parameter point.
pub fn generator_point_suite(params: &PdParams, max_degree: u32) -> Result<Report> {
    if max_degree < 2 || max_degree > 10 {
        return Err(Error::Domain(format!(
            "generator sweep needs 2 <= max-degree <= 10, got {max_degree}"
        )));
    }
    let monos = monomials_of_degree_at_most(max_degree)?;
    let mut checks = Vec::new();
    let mut worst_mean = 0.0_f64;
    for m in &monos {
        let poly = PowerSumPoly::monomial(m.clone(), 1.0);
        worst_mean = worst_mean.max(stationary_mean_residual(params, &poly)?);
    }
    checks.push(Check::within(
        format!(
            "stationary mean of generator images, degree <= {max_degree} ({})",
            label(params)
        ),
        worst_mean,
        0.0,
        1e-10,
    ));
    let mut worst_sym = 0.0_f64;
    for (i, u) in monos.iter().enumerate() {
        let pu = PowerSumPoly::monomial(u.clone(), 1.0);
        for v in monos.iter().skip(i + 1) {
            let pv = PowerSumPoly::monomial(v.clone(), 1.0);
            let uv = dirichlet_form(params, &pu, &pv)?;
            let vu = dirichlet_form(params, &pv, &pu)?;
            worst_sym = worst_sym.max((uv - vu).abs());
        }
    }
    checks.push(Check::within(
        format!(
            "energy form symmetry, degree <= {max_degree} ({})",
            label(params)
        ),
        worst_sym,
        0.0,
        1e-10,
    ));
    Ok(Report::from_checks("generator", None, checks))
}

/// Spectral contract at one `(alpha, theta)`, listing every eigenvalue.
pub fn spectrum_point_suite(alpha: f64, theta: f64, max_degree: u32) -> Result<Report> {
    let params = PdParams::new_two_param(alpha, theta)?;
    let (basis, matrix) = generator_matrix(&params, max_degree)?;
    let mut checks = Vec::new();
    let mut above = 0.0_f64;
    for (j, mono) in basis.iter().enumerate() {
        for (i, target) in basis.iter().enumerate() {
            if target.degree() > mono.degree() {
                above = above.max(matrix[i][j].abs());
            }
        }
    }
    checks.push(Check::within(
        format!("no degree-raising terms (theta={theta})"),
        above,
        0.0,
        0.0,
    ));
    let mut worst_diag = 0.0_f64;
    for (j, mono) in basis.iter().enumerate() {
        let want = if mono.is_constant() {
            0.0
        } else {
            -decay_rate(theta, mono.degree())
        };
        worst_diag = worst_diag.max((matrix[j][j] - want).abs());
    }
    checks.push(Check::within(
        format!("diagonal matches -m(m - 1 + theta)/2 (theta={theta})"),
        worst_diag,
        0.0,
        1e-12,
    ));
    for (idx, line) in spectrum(&params, max_degree)?.iter().enumerate() {
        let (want_eig, want_mult, desc) = if idx == 0 {
            (0.0, 1, "constants".to_string())
        } else {
            let m = idx as u32 + 1;
            (
                -decay_rate(theta, m),
                partition_count(m)? - partition_count(m - 1)?,
                format!("degree m={m}"),
            )
        };
        checks.push(
            Check::within(
                format!(
                    "eigenvalue for {desc} is {} with multiplicity {} (theta={theta})",
                    line.eigenvalue, line.multiplicity
                ),
                line.eigenvalue,
                want_eig,
                0.0,
            )
            .at_n(idx as u64 + 1),
        );
        checks.push(
            Check::within(
                format!(
                    "multiplicity for {desc} counts unit-free partitions (theta={theta})"
                ),
                line.multiplicity as f64,
                want_mult as f64,
                0.0,
            )
            .at_n(idx as u64 + 1),
        );
    }
    Ok(Report::from_checks("spectrum", None, checks))
}

/// Ensemble power-sum means against the exact flow at one parameter point.
pub fn diffusion_ode_point_suite(
    params: &PdParams,
    paths: usize,
    dt: f64,
    seed: u64,
) -> Result<Report> {
    if paths < 100 {
        return Err(Error::Domain("need at least 100 paths".into()));
    }
    if !(dt > 0.0 && dt <= 0.01) {
        return Err(Error::Domain(format!(
            "need 0 < dt <= 0.01 for the weak error to sit inside the band, got {dt}"
        )));
    }
    let checkpoints = [0.05, 0.1, 0.2, 0.35, 0.5];
    let orders = [2u32, 3];
    let cfg = UnlabeledConfig {
        dt,
        ..UnlabeledConfig::default()
    };
    let curve = ensemble_power_moments(params, cfg, &[1.0], &checkpoints, &orders, paths, seed)?;
    let mut checks = Vec::new();
    for (c, &t) in checkpoints.iter().enumerate() {
        let exact = moment_flow(params, 3, &[1.0, 1.0], t)?;
        for (o, &order) in orders.iter().enumerate() {
            checks.push(Check::within(
                format!("ensemble mean of phi{order} at t={t} ({})", label(params)),
                curve.mean[c][o],
                exact[order as usize - 2],
                3.0 * curve.se[c][o],
            ));
        }
    }
    Ok(Report::from_checks("diffusion-ode", Some(seed), checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_suites_pass() {
        for report in [
            epsf_suite().unwrap(),
            aux_identity_suite().unwrap(),
            generator_suite().unwrap(),
            spectrum_suite().unwrap(),
        ] {
            assert!(
                report.pass,
                "{} failed: {:?}",
                report.suite,
                report.worst()
            );
        }
    }

    #[test]
    fn small_monte_carlo_suites_run_and_serialize() {
        // smoke sizes; the full sizes run in the acceptance target
        let report = ranked_marginal_suite(400, 11).unwrap();
        assert!(report.pass, "worst: {:?}", report.worst());
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"suite\":\"ranked-marginal\""));
        assert!(text.contains("\"pass\""));
        let report = updown_suite(50_000, 12).unwrap();
        assert!(report.pass, "worst: {:?}", report.worst());
    }

    #[test]
    fn undersized_requests_are_rejected() {
        assert!(moments_mc_suite(10, 1).is_err());
        assert!(diffusion_ode_suite(10, 1).is_err());
        assert!(updown_suite(10, 1).is_err());
        assert!(two_type_suite(10, 1).is_err());
        assert!(ranked_marginal_suite(10, 1).is_err());
        assert!(selection_suite(10, 1).is_err());
    }

    #[test]
    fn point_suites_pass_and_list_per_size_checks() {
        let params = PdParams::new_two_param(0.3, 0.7).unwrap();
        let report = epsf_point_suite(&params, 12).unwrap();
        assert!(report.pass, "worst: {:?}", report.worst());
        assert_eq!(report.checks.len(), 12);
        assert_eq!(report.checks[11].n, Some(12));

        let report = aux_identity_point_suite(&params, 15).unwrap();
        assert!(report.pass, "worst: {:?}", report.worst());
        assert_eq!(report.checks.len(), 15);

        let report = generator_point_suite(&params, 4).unwrap();
        assert!(report.pass, "worst: {:?}", report.worst());

        assert!(epsf_point_suite(&params, 0).is_err());
        assert!(aux_identity_point_suite(&params, 46).is_err());
        assert!(generator_point_suite(&params, 1).is_err());
    }

    #[test]
    fn spectrum_point_suite_lists_known_eigenvalues() {
        let report = spectrum_point_suite(0.2, 1.0, 6).unwrap();
        assert!(report.pass, "worst: {:?}", report.worst());
        let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        assert!(names.iter().any(|n| n.contains("is -18 with multiplicity 4")));
        assert!(names.iter().any(|n| n.contains("is -12.5 with multiplicity 2")));
        assert!(names.iter().any(|n| n.contains("is -2 with multiplicity 1")));
    }

    #[test]
    fn diffusion_ode_point_suite_runs_small() {
        let params = PdParams::new_two_param(0.0, 1.0).unwrap();
        let report = diffusion_ode_point_suite(&params, 400, 1e-3, 5).unwrap();
        assert_eq!(report.checks.len(), 10);
        assert_eq!(report.seed, Some(5));
        assert!(diffusion_ode_point_suite(&params, 400, 0.5, 5).is_err());
    }

    #[test]
    fn check_semantics() {
        assert!(Check::within("a", 1.0 + 1e-12, 1.0, 1e-10).pass);
        assert!(!Check::within("b", 1.1, 1.0, 1e-10).pass);
        assert!(!Check::within("c", f64::NAN, 1.0, 1e-10).pass);
        assert!(Check::statistic("d", 0.01, 0.02).pass);
        assert!(!Check::statistic("e", 0.03, 0.02).pass);
        let r = Report::from_checks("s", None, vec![Check::within("a", 1.0, 1.0, 0.0)]);
        assert!(r.pass);
    }
}
