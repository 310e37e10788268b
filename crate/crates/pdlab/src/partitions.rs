//! Integer partitions and exact partition-structure probabilities.
//!
//! A sample of size `n` from a ranked random discrete distribution induces a
//! random set partition of `{1, ..., n}`; forgetting labels leaves an integer
//! partition of `n`. [`epsf_probability`] gives the exact probability of each
//! such partition, and the block-count helpers give closed forms for its
//! expected number of parts.

use crate::core::{log_gamma, tol, PdParams};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Partition of a nonnegative integer: parts in decreasing order, each `>= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntegerPartition {
    parts: Vec<u32>,
}

impl IntegerPartition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        for (i, &p) in parts.iter().enumerate() {
            if p == 0 {
                return Err(Error::Domain("parts must be positive".into()));
            }
            if i > 0 && p > parts[i - 1] {
                return Err(Error::Domain(format!(
                    "parts must be decreasing, violated at index {i}"
                )));
            }
        }
        Ok(IntegerPartition { parts })
    }

    /// The empty partition of 0.
    pub fn empty() -> Self {
        IntegerPartition { parts: Vec::new() }
    }

    /// Single-row partition `(n)`.
    pub fn single_block(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("single block needs n >= 1".into()));
        }
        Ok(IntegerPartition { parts: vec![n] })
    }

    /// Weight `n`: the sum of the parts.
    pub fn n(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// `(part value, multiplicity)` pairs in increasing part order.
    pub fn multiplicities(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &p in self.parts.iter().rev() {
            match out.last_mut() {
                Some((v, c)) if *v == p => *c += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Copy with one part of size `k` grown to `k + 1`.
    pub fn increment_part(&self, k: u32) -> Result<Self> {
        let idx = self
            .parts
            .iter()
            .position(|&p| p == k)
            .ok_or_else(|| Error::Domain(format!("no part of size {k}")))?;
        let mut parts = self.parts.clone();
        parts[idx] += 1;
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(IntegerPartition { parts })
    }

    /// Copy with an extra part of size 1.
    pub fn add_unit_part(&self) -> Self {
        let mut parts = self.parts.clone();
        parts.push(1);
        IntegerPartition { parts }
    }

    /// Copy with one part of size `k` shrunk to `k - 1` (dropped when empty).
    pub fn decrement_part(&self, k: u32) -> Result<Self> {
        let idx = self
            .parts
            .iter()
            .position(|&p| p == k)
            .ok_or_else(|| Error::Domain(format!("no part of size {k}")))?;
        let mut parts = self.parts.clone();
        if k == 1 {
            parts.remove(idx);
        } else {
            parts[idx] -= 1;
            parts.sort_unstable_by(|a, b| b.cmp(a));
        }
        Ok(IntegerPartition { parts })
    }
}

impl std::fmt::Display for IntegerPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Number of integer partitions of `m`, by the pentagonal number recurrence.
///
/// Supported up to `m = 416`, the largest value whose count fits in a `u64`.
pub fn partition_count(m: u32) -> Result<u64> {
    if m > 416 {
        return Err(Error::Capacity(format!(
            "partition count of {m} overflows a u64 (max 416)"
        )));
    }
    let m = m as usize;
    let mut p = vec![0i128; m + 1];
    p[0] = 1;
    for n in 1..=m {
        let mut acc = 0i128;
        let mut k = 1i64;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > n {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc += sign as i128 * p[n - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= n {
                acc += sign as i128 * p[n - g2];
            }
            k += 1;
        }
        p[n] = acc;
    }
    Ok(p[m] as u64)
}

/// All partitions of `n` in reverse lexicographic order: `(n)` first,
/// `(1, ..., 1)` last. Capped at [`tol::MAX_ENUM_N`].
pub fn enumerate_partitions(n: u32) -> Result<Vec<IntegerPartition>> {
    if n > tol::MAX_ENUM_N {
        return Err(Error::Capacity(format!(
            "refusing to enumerate partitions of {n} (max {})",
            tol::MAX_ENUM_N
        )));
    }
    let mut out = Vec::with_capacity(partition_count(n)? as usize);
    let mut current: Vec<u32> = Vec::new();
    fn rec(remaining: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<IntegerPartition>) {
        if remaining == 0 {
            out.push(IntegerPartition {
                parts: current.clone(),
            });
            return;
        }
        let top = remaining.min(max_part);
        for part in (1..=top).rev() {
            current.push(part);
            rec(remaining - part, part, current, out);
            current.pop();
        }
    }
    rec(n, n, &mut current, &mut out);
    Ok(out)
}

/// Exact probability of an unlabeled sample partition.
///
/// For a partition `lambda` of `n` with parts `l_1 >= ... >= l_k`:
///
/// ```text
/// n! / (prod_j mult_j! * prod_i l_i!)
///   * prod_{j=1}^{k-1} (theta + j alpha)
///   * prod_i (1 - alpha)_(l_i - 1)
///   / (theta + 1)_(n - 1)
/// ```
///
/// Every factor is positive on the admissible parameter set, so the product
/// is evaluated in log space with no sign bookkeeping. In the finite case a
/// partition with more parts than atoms picks up a zero factor and the
/// probability is exactly zero.
pub fn epsf_probability(params: &PdParams, partition: &IntegerPartition) -> Result<f64> {
    let n = partition.n();
    if n == 0 {
        return Err(Error::Domain("empty partition has no probability".into()));
    }
    let alpha = params.alpha();
    let theta = params.theta();
    let ell = partition.len() as u32;

    let mut log_m = log_gamma(f64::from(n) + 1.0)?;
    for (_, mult) in partition.multiplicities() {
        log_m -= log_gamma(f64::from(mult) + 1.0)?;
    }
    for j in 1..ell {
        let factor = theta + f64::from(j) * alpha;
        if factor <= 0.0 {
            // finite case: more parts than atoms
            return Ok(0.0);
        }
        log_m += factor.ln();
    }
    let lg_one_minus_alpha = log_gamma(1.0 - alpha)?;
    for &part in partition.parts() {
        log_m += log_gamma(f64::from(part) - alpha)? - lg_one_minus_alpha
            - log_gamma(f64::from(part) + 1.0)?;
    }
    log_m -= log_gamma(theta + f64::from(n))? - log_gamma(theta + 1.0)?;
    Ok(log_m.exp())
}

/// Probability that a marked sample among `n + 1` forms a singleton block;
/// equivalently `E[sum_i w_i (1 - w_i)^n]` over the ranked weights.
pub fn singleton_probability(params: &PdParams, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("need n >= 1".into()));
    }
    let alpha = params.alpha();
    let theta = params.theta();
    let v = log_gamma(theta + 1.0)? + log_gamma(theta + alpha + f64::from(n))?
        - log_gamma(theta + alpha)?
        - log_gamma(theta + f64::from(n) + 1.0)?;
    Ok(v.exp())
}

/// Expected number of blocks in an `n`-sample, in closed form.
pub fn expected_block_count(params: &PdParams, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("need n >= 1".into()));
    }
    let alpha = params.alpha();
    let theta = params.theta();
    if alpha == 0.0 {
        let mut s = 0.0;
        for i in 0..n {
            s += theta / (theta + f64::from(i));
        }
        return Ok(s);
    }
    let s_n = singleton_probability(params, n)?;
    Ok(((theta + f64::from(n)) * s_n - theta) / alpha)
}

/// Expected number of blocks by exhaustive enumeration: `sum_lambda
/// epsf_probability(lambda) * len(lambda)` over all partitions of `n`.
pub fn expected_block_count_by_enumeration(params: &PdParams, n: u32) -> Result<f64> {
    let mut acc = 0.0;
    for partition in enumerate_partitions(n)? {
        if partition.is_empty() {
            return Err(Error::Domain("need n >= 1".into()));
        }
        acc += epsf_probability(params, &partition)? * partition.len() as f64;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tp(alpha: f64, theta: f64) -> PdParams {
        PdParams::new_two_param(alpha, theta).unwrap()
    }

    fn part(parts: &[u32]) -> IntegerPartition {
        IntegerPartition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn partition_type_validation() {
        assert!(IntegerPartition::new(vec![3, 1, 1]).is_ok());
        assert!(IntegerPartition::new(vec![1, 3]).is_err());
        assert!(IntegerPartition::new(vec![2, 0]).is_err());
        assert_eq!(part(&[3, 1, 1]).n(), 5);
        assert_eq!(part(&[3, 1, 1]).len(), 3);
        assert_eq!(part(&[3, 2, 2, 1]).multiplicities(), vec![(1, 1), (2, 2), (3, 1)]);
    }

    #[test]
    fn box_moves() {
        let lam = part(&[3, 1, 1]);
        assert_eq!(lam.increment_part(1).unwrap(), part(&[3, 2, 1]));
        assert_eq!(lam.increment_part(3).unwrap(), part(&[4, 1, 1]));
        assert!(lam.increment_part(2).is_err());
        assert_eq!(lam.add_unit_part(), part(&[3, 1, 1, 1]));
        assert_eq!(lam.decrement_part(1).unwrap(), part(&[3, 1]));
        assert_eq!(lam.decrement_part(3).unwrap(), part(&[2, 1, 1]));
    }

    #[test]
    fn partition_counts_match_enumeration() {
        // pentagonal recurrence against direct generation
        for n in 0..=26 {
            let by_enum = enumerate_partitions(n).unwrap().len() as u64;
            assert_eq!(partition_count(n).unwrap(), by_enum, "n = {n}");
        }
    }

    #[test]
    fn partition_counts_known_values() {
        let expected = [1u64, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42];
        for (n, &e) in expected.iter().enumerate() {
            assert_eq!(partition_count(n as u32).unwrap(), e);
        }
        assert_eq!(partition_count(60).unwrap(), 966_467);
        assert_eq!(partition_count(100).unwrap(), 190_569_292);
        assert!(partition_count(417).is_err());
    }

    #[test]
    fn enumeration_order_and_bounds() {
        let all = enumerate_partitions(6).unwrap();
        assert_eq!(all.first().unwrap(), &part(&[6]));
        assert_eq!(all.get(1).unwrap(), &part(&[5, 1]));
        assert_eq!(all.last().unwrap(), &part(&[1, 1, 1, 1, 1, 1]));
        assert!(all.iter().all(|p| p.n() == 6));
        assert!(enumerate_partitions(tol::MAX_ENUM_N + 1).is_err());
    }

    #[test]
    fn epsf_small_sample_hand_values() {
        for params in [tp(0.5, 0.5), tp(0.3, 2.0), tp(0.0, 1.5), tp(0.7, 0.0), tp(0.5, -0.25)] {
            let (a, t) = (params.alpha(), params.theta());
            let m2 = epsf_probability(&params, &part(&[2])).unwrap();
            assert!((m2 - (1.0 - a) / (1.0 + t)).abs() < 1e-12, "{params}");
            let m11 = epsf_probability(&params, &part(&[1, 1])).unwrap();
            assert!((m11 - (t + a) / (1.0 + t)).abs() < 1e-12, "{params}");
            let m21 = epsf_probability(&params, &part(&[2, 1])).unwrap();
            let expect = 3.0 * (t + a) * (1.0 - a) / ((1.0 + t) * (2.0 + t));
            assert!((m21 - expect).abs() < 1e-12, "{params}");
            let m111 = epsf_probability(&params, &part(&[1, 1, 1])).unwrap();
            let expect = (t + a) * (t + 2.0 * a) / ((1.0 + t) * (2.0 + t));
            assert!((m111 - expect).abs() < 1e-12, "{params}");
        }
    }

    #[test]
    fn epsf_zero_discount_matches_cycle_formula() {
        // at alpha = 0 the probability is n! theta^k / (prod mult! prod l_i) / (theta)_n
        let theta = 1.7;
        let params = tp(0.0, theta);
        let lam = part(&[4, 2, 2, 1]);
        let asc: f64 = (0..9).map(|i| theta + i as f64).product();
        let expect = 362880.0 * theta.powi(4) / (2.0 * (4.0 * 2.0 * 2.0 * 1.0)) / asc;
        let got = epsf_probability(&params, &lam).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn epsf_sums_to_one() {
        let grid = [
            tp(0.0, 0.5),
            tp(0.0, 2.0),
            tp(0.3, 0.0),
            tp(0.5, 0.5),
            tp(0.8, -0.3),
            PdParams::new_finite_case(0.5, 3).unwrap(),
            PdParams::new_finite_case(2.0, 5).unwrap(),
        ];
        for params in grid {
            for n in [1u32, 2, 5, 9, 12] {
                let total: f64 = enumerate_partitions(n)
                    .unwrap()
                    .iter()
                    .map(|p| epsf_probability(&params, p).unwrap())
                    .sum();
                assert!((total - 1.0).abs() < 1e-10, "{params} n = {n}: {total}");
            }
        }
    }

    #[test]
    fn finite_case_caps_block_count() {
        let params = PdParams::new_finite_case(0.5, 3).unwrap();
        assert_eq!(epsf_probability(&params, &part(&[1, 1, 1, 1])).unwrap(), 0.0);
        assert_eq!(epsf_probability(&params, &part(&[2, 1, 1, 1])).unwrap(), 0.0);
        assert!(epsf_probability(&params, &part(&[1, 1, 1])).unwrap() > 0.0);
    }

    #[test]
    fn singleton_probability_closed_forms() {
        // n = 1: one minus the mean pair coincidence
        for params in [tp(0.5, 0.5), tp(0.2, 1.0), tp(0.0, 0.7)] {
            let (a, t) = (params.alpha(), params.theta());
            let got = singleton_probability(&params, 1).unwrap();
            assert!((got - (t + a) / (t + 1.0)).abs() < 1e-13);
        }
        // hand value at alpha = theta = 1/2, n = 2
        let got = singleton_probability(&tp(0.5, 0.5), 2).unwrap();
        assert!((got - 8.0 / 15.0).abs() < 1e-13);
        // alpha = 0: theta / (theta + n)
        let got = singleton_probability(&tp(0.0, 2.0), 7).unwrap();
        assert!((got - 2.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn singleton_probability_matches_symmetric_dirichlet() {
        // finite case by direct beta moments: m * B(kappa + 1, (m-1)kappa + n) / B(kappa, (m-1)kappa)
        let (kappa, m) = (0.75, 4u32);
        let params = PdParams::new_finite_case(kappa, m).unwrap();
        let n = 5u32;
        let lb = |x: f64| log_gamma(x).unwrap();
        let rest = (f64::from(m) - 1.0) * kappa;
        let log_expect = (f64::from(m)).ln()
            + lb(kappa + 1.0) + lb(rest + f64::from(n)) - lb(kappa + rest + f64::from(n) + 1.0)
            - (lb(kappa) + lb(rest) - lb(kappa + rest));
        let got = singleton_probability(&params, n).unwrap();
        assert!((got - log_expect.exp()).abs() < 1e-13);
    }

    #[test]
    fn block_count_small_n_closed_forms() {
        for params in [
            tp(0.5, 0.5),
            tp(0.3, 2.0),
            tp(0.0, 1.5),
            tp(0.7, 0.0),
            PdParams::new_finite_case(0.5, 3).unwrap(),
        ] {
            let (a, t) = (params.alpha(), params.theta());
            let e1 = expected_block_count(&params, 1).unwrap();
            assert!((e1 - 1.0).abs() < 1e-10, "{params}: {e1}");
            let e2 = expected_block_count(&params, 2).unwrap();
            assert!((e2 - (1.0 + a + 2.0 * t) / (1.0 + t)).abs() < 1e-10, "{params}");
        }
    }

    #[test]
    fn block_count_matches_enumeration() {
        for params in [tp(0.5, 0.5), tp(0.0, 2.0), tp(0.8, -0.3), PdParams::new_finite_case(1.0, 3).unwrap()]
        {
            for n in [3u32, 6, 10] {
                let closed = expected_block_count(&params, n).unwrap();
                let brute = expected_block_count_by_enumeration(&params, n).unwrap();
                assert!((closed - brute).abs() < 1e-10, "{params} n = {n}");
            }
        }
    }

    proptest! {
        #[test]
        fn epsf_is_a_probability(
            alpha in 0.0f64..0.95,
            dtheta in 0.01f64..3.0,
            seed in 0u64..1000,
        ) {
            let params = tp(alpha, -alpha + dtheta);
            let all = enumerate_partitions(7).unwrap();
            let lam = &all[(seed as usize) % all.len()];
            let p = epsf_probability(&params, lam).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&p));
        }

        #[test]
        fn block_count_monotone_in_n(
            alpha in 0.0f64..0.9,
            dtheta in 0.05f64..3.0,
            n in 1u32..30,
        ) {
            let params = tp(alpha, -alpha + dtheta);
            let a = expected_block_count(&params, n).unwrap();
            let b = expected_block_count(&params, n + 1).unwrap();
            prop_assert!(b + 1e-10 >= a);
        }
    }
}
