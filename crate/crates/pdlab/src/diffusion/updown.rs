//! Up-down Markov chains on integer partitions.
//!
//! The up kernel seats one more element by the usual table rules: an
//! existing block of size `k` attracts the newcomer with weight `k - alpha`,
//! a fresh block opens with weight `theta + (number of blocks) * alpha`.
//! The down kernel removes a uniformly chosen element. One chain step is
//! up then down, so the partition size `n` is preserved.
//!
//! The up kernel is exactly the conditional law of the size-`n+1` partition
//! given its restriction, which makes the composed chain reversible with
//! respect to the exchangeable partition probabilities at size `n`. The
//! scaled chains approximate the measure-valued diffusion; here they serve
//! as exact finite references.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::core::PdParams;
use crate::error::{Error, Result};
use crate::partitions::{enumerate_partitions, epsf_probability, IntegerPartition};

/// Largest `n` for which the dense transition matrix is built.
const MAX_MATRIX_N: u32 = 20;

/// Up-down chain on partitions of a fixed size `n`.
pub struct UpDownChain {
    params: PdParams,
    n: u32,
}

impl UpDownChain {
    pub fn new(params: &PdParams, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("chain size n must be positive".into()));
        }
        Ok(UpDownChain { params: *params, n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Seating probabilities for one more element: outcomes with a grown
    /// block of each present size, then possibly a fresh unit block.
    ///
    /// Normalized exactly on the support of the partition probabilities;
    /// in the finite regime, states with more blocks than atoms lie outside
    /// it and get meaningless weights.
    pub fn up_distribution(&self, state: &IntegerPartition) -> Result<Vec<(IntegerPartition, f64)>> {
        let n = state.n() as f64;
        let alpha = self.params.alpha();
        let theta = self.params.theta();
        let blocks = state.len() as f64;
        let denom = n + theta;
        let mut out = Vec::new();
        if state.is_empty() {
            // first element always opens a block, even at theta = 0
            return Ok(vec![(state.add_unit_part(), 1.0)]);
        }
        if denom <= 0.0 {
            return Err(Error::Domain(format!(
                "up kernel undefined at n = {n}, theta = {theta}"
            )));
        }
        for (k, count) in state.multiplicities() {
            let w = count as f64 * (k as f64 - alpha) / denom;
            out.push((state.increment_part(k)?, w));
        }
        let new_block = (theta + blocks * alpha).max(0.0) / denom;
        if new_block > 0.0 {
            out.push((state.add_unit_part(), new_block));
        }
        Ok(out)
    }

    /// Removal probabilities: a uniform element leaves, shrinking one block.
    pub fn down_distribution(
        &self,
        state: &IntegerPartition,
    ) -> Result<Vec<(IntegerPartition, f64)>> {
        if state.is_empty() {
            return Err(Error::Domain("cannot remove from an empty partition".into()));
        }
        let n = state.n() as f64;
        let mut out = Vec::new();
        for (k, count) in state.multiplicities() {
            let w = count as f64 * k as f64 / n;
            out.push((state.decrement_part(k)?, w));
        }
        Ok(out)
    }

    fn sample_from(
        moves: &[(IntegerPartition, f64)],
        rng: &mut (impl Rng + ?Sized),
    ) -> Result<IntegerPartition> {
        let dist = WeightedIndex::new(moves.iter().map(|(_, w)| *w))
            .map_err(|e| Error::Numeric(format!("degenerate move weights: {e}")))?;
        Ok(moves[dist.sample(rng)].0.clone())
    }

    pub fn up_step(
        &self,
        state: &IntegerPartition,
        rng: &mut (impl Rng + ?Sized),
    ) -> Result<IntegerPartition> {
        Self::sample_from(&self.up_distribution(state)?, rng)
    }

    pub fn down_step(
        &self,
        state: &IntegerPartition,
        rng: &mut (impl Rng + ?Sized),
    ) -> Result<IntegerPartition> {
        Self::sample_from(&self.down_distribution(state)?, rng)
    }

    /// One chain step: seat an extra element, then remove a uniform one.
    pub fn step(
        &self,
        state: &IntegerPartition,
        rng: &mut (impl Rng + ?Sized),
    ) -> Result<IntegerPartition> {
        if state.n() != self.n {
            return Err(Error::Domain(format!(
                "state has size {}, chain runs at size {}",
                state.n(),
                self.n
            )));
        }
        let up = self.up_step(state, rng)?;
        self.down_step(&up, rng)
    }

    /// All partitions of `n` and the row-stochastic one-step matrix.
    pub fn transition_matrix(&self) -> Result<(Vec<IntegerPartition>, Vec<Vec<f64>>)> {
        if self.n > MAX_MATRIX_N {
            return Err(Error::Capacity(format!(
                "dense matrix capped at n = {MAX_MATRIX_N}, requested {}",
                self.n
            )));
        }
        let states = enumerate_partitions(self.n)?;
        let index: BTreeMap<Vec<u32>, usize> = states
            .iter()
            .enumerate()
            .map(|(i, p)| (p.parts().to_vec(), i))
            .collect();
        let mut matrix = vec![vec![0.0; states.len()]; states.len()];
        for (i, state) in states.iter().enumerate() {
            for (mid, w_up) in self.up_distribution(state)? {
                for (target, w_down) in self.down_distribution(&mid)? {
                    let j = index[target.parts()];
                    matrix[i][j] += w_up * w_down;
                }
            }
        }
        Ok((states, matrix))
    }

    /// Stationary probabilities over `enumerate_partitions(n)` order.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        enumerate_partitions(self.n)?
            .iter()
            .map(|p| epsf_probability(&self.params, p))
            .collect()
    }
}
