//! Summary statistics and goodness-of-fit machinery for the Monte Carlo
//! checks: mean with standard error, Kolmogorov-Smirnov against an arbitrary
//! CDF, and Pearson chi-square against expected counts.

use crate::error::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 samples, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Two-sided Kolmogorov-Smirnov statistic of a sorted sample against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Domain("empty sample".into()));
    }
    if sorted.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("sample must be sorted ascending".into()));
    }
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::Numeric(format!("cdf({x}) = {f} is outside [0, 1]")));
        }
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d)
}

/// Upper quantile of the limiting Kolmogorov distribution: the `c` with
/// `2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 c^2) = significance`.
fn kolmogorov_quantile(significance: f64) -> f64 {
    let tail = |c: f64| -> f64 {
        let mut s = 0.0;
        for k in 1..=100 {
            let term = (-2.0 * (k as f64).powi(2) * c * c).exp();
            s += if k % 2 == 1 { term } else { -term };
        }
        2.0 * s
    };
    // tail is decreasing in c; bracket and bisect
    let (mut lo, mut hi) = (0.2, 4.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > significance {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Critical KS value at the given significance, with the small-sample
/// denominator correction `sqrt(n) + 0.12 + 0.11 / sqrt(n)`.
pub fn ks_critical(n: usize, significance: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("sample size must be positive".into()));
    }
    if !(0.0 < significance && significance < 0.5) {
        return Err(Error::Domain(format!(
            "significance must lie in (0, 0.5), got {significance}"
        )));
    }
    let c = kolmogorov_quantile(significance);
    let sn = (n as f64).sqrt();
    Ok(c / (sn + 0.12 + 0.11 / sn))
}

/// Pearson chi-square statistic for observed counts against expected counts.
pub fn chi_square_statistic(observed: &[u64], expected: &[f64]) -> Result<f64> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(Error::Domain("count vectors must match and be nonempty".into()));
    }
    let mut stat = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        if !(e > 0.0) {
            return Err(Error::Domain(format!("expected count must be positive, got {e}")));
        }
        stat += (o as f64 - e).powi(2) / e;
    }
    Ok(stat)
}

/// Upper critical value of the chi-square distribution with `df` degrees of
/// freedom at the given significance.
pub fn chi_square_critical(df: usize, significance: f64) -> Result<f64> {
    if df == 0 {
        return Err(Error::Domain("degrees of freedom must be positive".into()));
    }
    if !(0.0 < significance && significance < 1.0) {
        return Err(Error::Domain(format!(
            "significance must lie in (0, 1), got {significance}"
        )));
    }
    let dist = ChiSquared::new(df as f64)
        .map_err(|e| Error::Numeric(format!("chi-square setup failed: {e}")))?;
    Ok(dist.inverse_cdf(1.0 - significance))
}
