//! Exact offline optimizer and its brute-force verifier.
//!
//! Sorting arms by probability and taking the shortest prefix whose mean
//! exceeds `D − 1/2` minimizes `(Σ p − D)² + Σ p(1 − p)` exactly.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{expected_loss_unchecked, ProbabilityProfile, Subset};
use crate::{Error, Result};

/// Largest profile `brute_force_optimal` will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub subset: Subset,
    pub k: usize,
    pub expected_loss: f64,
    /// Arms in non-increasing order of probability.
    pub sorted_order: Vec<usize>,
}

/// Orders arms by `scores` descending. Exactly equal scores are shuffled
/// uniformly using `rng`.
pub fn rank_descending<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> Vec<usize> {
    let keys: Vec<u64> = scores.iter().map(|_| rng.random()).collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| match scores[b].total_cmp(&scores[a]) {
        Ordering::Equal => keys[a].cmp(&keys[b]),
        other => other,
    });
    order
}

/// Orders arms by `scores` descending, breaking ties by index.
pub fn rank_descending_stable(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Smallest `k ≥ 0` whose prefix of `values` along `order` sums to more than
/// `target − 1/2`, or `n` when no prefix does.
///
/// The strict comparison is done on raw floats with no slack.
pub fn threshold_count(order: &[usize], values: &[f64], target: f64) -> usize {
    let threshold = target - 0.5;
    let mut sum = 0.0;
    if sum > threshold {
        return 0;
    }
    for (pos, &arm) in order.iter().enumerate() {
        sum += values[arm];
        if sum > threshold {
            return pos + 1;
        }
    }
    order.len()
}

fn select_with_order(p: &ProbabilityProfile, target: f64, order: Vec<usize>) -> OracleResult {
    let k = threshold_count(&order, p.probs(), target);
    let subset = Subset::from_prefix(&order, k);
    let expected_loss = expected_loss_unchecked(p.probs(), subset.indices(), target);
    OracleResult {
        subset,
        k,
        expected_loss,
        sorted_order: order,
    }
}

/// Offline oracle `φ(p, D)` with random tie breaks among equal probabilities.
pub fn offline_select<R: Rng + ?Sized>(
    p: &ProbabilityProfile,
    target: f64,
    tie_rng: &mut R,
) -> Result<OracleResult> {
    check_target(target)?;
    let order = rank_descending(p.probs(), tie_rng);
    Ok(select_with_order(p, target, order))
}

/// Same as [`offline_select`] but ties go to the lower index. The optimal
/// value does not depend on how ties are broken.
pub fn offline_select_stable(p: &ProbabilityProfile, target: f64) -> Result<OracleResult> {
    check_target(target)?;
    let order = rank_descending_stable(p.probs());
    Ok(select_with_order(p, target, order))
}

fn check_target(target: f64) -> Result<()> {
    if target > 0.0 && target.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTarget(target))
    }
}

/// Exhaustive minimizer over all `2ⁿ` subsets.
///
/// Subsets are visited in bitmask order (bit `i` set means arm `i` is
/// selected) and the first strict minimum is returned.
pub fn brute_force_optimal(p: &ProbabilityProfile, target: f64) -> Result<(Subset, f64)> {
    let n = p.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyArms {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let probs = p.probs();
    let mut best_mask = 0u32;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1u32 << n) {
        let mut mean = 0.0;
        let mut variance = 0.0;
        for (i, &q) in probs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                mean += q;
                variance += q * (1.0 - q);
            }
        }
        let value = (mean - target) * (mean - target) + variance;
        if value < best {
            best = value;
            best_mask = mask;
        }
    }
    let indices = (0..n).filter(|i| best_mask & (1 << i) != 0).collect();
    Ok((Subset::new(indices, n)?, best))
}
