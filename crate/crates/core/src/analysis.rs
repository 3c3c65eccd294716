//! Regret bookkeeping, robustness radii and replicate aggregation.

use serde::{Deserialize, Serialize};

use crate::model::{expected_loss, ProbabilityProfile, Subset};
use crate::oracle::{offline_select_stable, rank_descending_stable};
use crate::{Error, Result};

/// Sentinel used for `Δ_0` and `Δ_n`.
const GAP_SENTINEL: f64 = 2.0;

/// Every parameter of the general robustness radius `ε₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBreakdown {
    pub l1: usize,
    pub l2: usize,
    pub k1: usize,
    pub k2: usize,
    pub delta1: f64,
    pub delta2: f64,
    /// `Δ_0..=Δ_n` along the sorted order, sentinels at both ends.
    pub gaps: Vec<f64>,
    pub epsilon0: f64,
    pub a1_a2_hold: bool,
}

fn sorted_desc(p: &ProbabilityProfile) -> Vec<f64> {
    rank_descending_stable(p.probs())
        .into_iter()
        .map(|i| p.probs()[i])
        .collect()
}

/// `prefix[k] = Σ_{i<k} p_σ(i)`, accumulated left to right.
fn prefix_sums(sorted: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(sorted.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for &q in sorted {
        acc += q;
        out.push(acc);
    }
    out
}

fn gap_vector(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    (0..=n)
        .map(|i| {
            if i == 0 || i == n {
                GAP_SENTINEL
            } else {
                sorted[i - 1] - sorted[i]
            }
        })
        .collect()
}

/// Checks A1 (positive, distinct probabilities) and A2 (a prefix strictly
/// straddles `D − 1/2`). Returns the prefix length `k` when both hold.
fn a1_a2(sorted: &[f64], prefix: &[f64], target: f64) -> Result<usize> {
    let distinct = sorted.windows(2).all(|w| w[0] > w[1]);
    if !distinct || sorted.last().is_some_and(|&q| q <= 0.0) {
        return Err(Error::AssumptionViolated(
            "A1 needs positive, distinct probabilities".into(),
        ));
    }
    let threshold = target - 0.5;
    let k = (1..prefix.len()).find(|&k| prefix[k] > threshold);
    match k {
        Some(k) if prefix[k - 1] < threshold => Ok(k),
        _ => Err(Error::AssumptionViolated(
            "A2 needs a prefix with Σ_k > D − 1/2 > Σ_{k−1}".into(),
        )),
    }
}

/// Closed-form `ε₀ = min(δ₁/k, δ₂/k, Δ_k/2)` under A1 and A2.
pub fn epsilon0_a1a2(p: &ProbabilityProfile, target: f64) -> Result<f64> {
    let sorted = sorted_desc(p);
    let prefix = prefix_sums(&sorted);
    let k = a1_a2(&sorted, &prefix, target)?;
    let threshold = target - 0.5;
    let delta1 = prefix[k] - threshold;
    let delta2 = threshold - prefix[k - 1];
    let gap = gap_vector(&sorted)[k];
    let kf = k as f64;
    Ok((delta1 / kf).min(delta2 / kf).min(gap / 2.0))
}

/// General `ε₀ = min(δ₁/l₁, δ₂/l₂, Δ_{k₁}/2, Δ_{k₂}/2)` without A1/A2.
///
/// Targets below 1/2 have a known optimum (the empty set) and report
/// `ε₀ = +∞`.
pub fn epsilon0_general(p: &ProbabilityProfile, target: f64) -> EpsilonBreakdown {
    let n = p.n();
    let sorted = sorted_desc(p);
    let prefix = prefix_sums(&sorted);
    let gaps = gap_vector(&sorted);
    let a1_a2_hold = a1_a2(&sorted, &prefix, target).is_ok();
    if target < 0.5 {
        return EpsilonBreakdown {
            l1: 0,
            l2: 0,
            k1: 0,
            k2: 0,
            delta1: f64::INFINITY,
            delta2: f64::INFINITY,
            gaps,
            epsilon0: f64::INFINITY,
            a1_a2_hold,
        };
    }
    let threshold = target - 0.5;

    let (l1, delta1) = match (1..=n).find(|&k| prefix[k] > threshold) {
        Some(l1) => (l1, prefix[l1] - threshold),
        None => (n, n as f64),
    };
    let l2 = (0..l1).rev().find(|&k| prefix[k] < threshold).unwrap_or(0);
    let delta2 = if l2 >= 1 { threshold - prefix[l2] } else { 1.0 };
    let k1 = (0..l1).rev().find(|&i| gaps[i] > 0.0).unwrap_or(0);
    let k2 = (l1..=n).find(|&i| gaps[i] > 0.0).unwrap_or(n);

    let delta2_term = if l2 == 0 {
        f64::INFINITY
    } else {
        delta2 / l2 as f64
    };
    let epsilon0 = (delta1 / l1 as f64)
        .min(delta2_term)
        .min(gaps[k1] / 2.0)
        .min(gaps[k2] / 2.0);

    EpsilonBreakdown {
        l1,
        l2,
        k1,
        k2,
        delta1,
        delta2,
        gaps,
        epsilon0,
        a1_a2_hold,
    }
}

/// Target-independent radius `ε₁ = min(Δ_min/2, β_min/n)`.
///
/// When every arm ties there is no positive gap and the `Δ_min` term is
/// dropped.
pub fn epsilon1(p: &ProbabilityProfile) -> Result<f64> {
    let beta_min = p
        .probs()
        .iter()
        .copied()
        .filter(|&q| q > 0.0)
        .fold(f64::INFINITY, f64::min);
    if beta_min.is_infinite() {
        return Err(Error::DegenerateProfile);
    }
    let sorted = sorted_desc(p);
    let gap_min = sorted
        .windows(2)
        .map(|w| w[0] - w[1])
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min);
    Ok((gap_min / 2.0).min(beta_min / p.n() as f64))
}

/// `E L(S_t) − min_S E L(S)` under the true profile, clamped at 0.
pub fn pseudo_regret_step(p: &ProbabilityProfile, selected: &Subset, target: f64) -> Result<f64> {
    let played = expected_loss(p, selected, target)?;
    let best = offline_select_stable(p, target)?.expected_loss;
    Ok(crate::model::clamp_regret(played - best))
}

/// Per-step regret and reliability series of one replicate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretSeries {
    pub per_step: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// `√(E L(S_t)) / D_t`.
    pub relative_deviation: Vec<f64>,
    /// `(Σ X − D_t) / D_t`.
    pub relative_error: Vec<f64>,
}

impl RegretSeries {
    pub fn with_capacity(horizon: usize) -> Self {
        Self {
            per_step: Vec::with_capacity(horizon),
            cumulative: Vec::with_capacity(horizon),
            relative_deviation: Vec::with_capacity(horizon),
            relative_error: Vec::with_capacity(horizon),
        }
    }

    pub fn push(&mut self, regret: f64, expected_loss: f64, target: f64, delivered: usize) {
        let regret = regret.max(0.0);
        let total = self.cumulative.last().copied().unwrap_or(0.0) + regret;
        self.per_step.push(regret);
        self.cumulative.push(total);
        self.relative_deviation.push(expected_loss.max(0.0).sqrt() / target);
        self.relative_error.push((delivered as f64 - target) / target);
    }

    pub fn len(&self) -> usize {
        self.per_step.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_step.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Per-step statistics across replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub replicates: usize,
    pub horizon: usize,
    pub mean_cumulative: Vec<f64>,
    pub cumulative_lo: Vec<f64>,
    pub cumulative_hi: Vec<f64>,
    pub mean_relative_error: Vec<f64>,
    pub relative_error_lo: Vec<f64>,
    pub relative_error_hi: Vec<f64>,
    pub mean_relative_deviation: Vec<f64>,
}

impl Summary {
    pub fn final_mean_cumulative(&self) -> f64 {
        self.mean_cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Lower and upper quantiles of the 90% band.
pub const BAND: (f64, f64) = (0.05, 0.95);

/// Linear-interpolation quantile of `values` (sorted in place).
pub fn quantile(values: &mut [f64], q: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    values[lo] + (values[hi] - values[lo]) * (pos - lo as f64)
}

/// Mean curves plus empirical 5–95% bands over replicates.
pub fn aggregate(replicates: &[RegretSeries]) -> Result<Summary> {
    let first = replicates.first().ok_or(Error::EmptyAggregate)?;
    let horizon = first.len();
    if let Some(other) = replicates.iter().find(|r| r.len() != horizon) {
        return Err(Error::HorizonMismatch(horizon, other.len()));
    }
    let count = replicates.len() as f64;
    let mut summary = Summary {
        replicates: replicates.len(),
        horizon,
        mean_cumulative: Vec::with_capacity(horizon),
        cumulative_lo: Vec::with_capacity(horizon),
        cumulative_hi: Vec::with_capacity(horizon),
        mean_relative_error: Vec::with_capacity(horizon),
        relative_error_lo: Vec::with_capacity(horizon),
        relative_error_hi: Vec::with_capacity(horizon),
        mean_relative_deviation: Vec::with_capacity(horizon),
    };
    let mut column = vec![0.0; replicates.len()];
    for t in 0..horizon {
        for (slot, r) in column.iter_mut().zip(replicates) {
            *slot = r.cumulative[t];
        }
        summary.mean_cumulative.push(column.iter().sum::<f64>() / count);
        summary.cumulative_lo.push(quantile(&mut column, BAND.0));
        summary.cumulative_hi.push(quantile(&mut column, BAND.1));

        for (slot, r) in column.iter_mut().zip(replicates) {
            *slot = r.relative_error[t];
        }
        summary.mean_relative_error.push(column.iter().sum::<f64>() / count);
        summary.relative_error_lo.push(quantile(&mut column, BAND.0));
        summary.relative_error_hi.push(quantile(&mut column, BAND.1));

        let dev = replicates.iter().map(|r| r.relative_deviation[t]).sum::<f64>() / count;
        summary.mean_relative_deviation.push(dev);
    }
    Ok(summary)
}
