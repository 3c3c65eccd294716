//! Domain values shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, TOLERANCE};

/// Hidden per-arm response probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityProfile {
    probs: Vec<f64>,
}

impl ProbabilityProfile {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyProfile);
        }
        for (arm, &value) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { arm, value });
            }
        }
        Ok(Self { probs })
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetKind {
    Static,
    TimeVarying,
}

/// Sequence of load-reduction targets `D_1..D_T`, all positive and bounded.
///
/// Indexing is 1-based. Steps past the end of a time-varying schedule wrap
/// around to the start, so a year of daily targets can drive a longer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSchedule {
    targets: Vec<f64>,
    kind: TargetKind,
    bound: f64,
}

impl TargetSchedule {
    pub fn constant(target: f64, horizon: usize) -> Result<Self> {
        Self::new(vec![target; horizon.max(1)], TargetKind::Static, target)
    }

    /// Builds a time-varying schedule bounded by its own maximum.
    pub fn varying(targets: Vec<f64>) -> Result<Self> {
        let bound = targets.iter().copied().fold(0.0, f64::max);
        Self::new(targets, TargetKind::TimeVarying, bound)
    }

    pub fn new(targets: Vec<f64>, kind: TargetKind, bound: f64) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidParameter {
                name: "targets",
                reason: "schedule is empty".into(),
            });
        }
        for (step, &value) in targets.iter().enumerate() {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidTarget(value));
            }
            if value > bound {
                return Err(Error::TargetAboveBound {
                    step: step + 1,
                    value,
                    bound,
                });
            }
        }
        if kind == TargetKind::Static && targets.iter().any(|&d| d != targets[0]) {
            return Err(Error::NonConstantStatic);
        }
        Ok(Self {
            targets,
            kind,
            bound,
        })
    }

    /// Target for the 1-based step `t`.
    pub fn at(&self, t: usize) -> f64 {
        debug_assert!(t >= 1);
        self.targets[(t - 1) % self.targets.len()]
    }

    pub fn first(&self) -> f64 {
        self.targets[0]
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

/// Sorted, duplicate-free set of arm indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subset {
    indices: Vec<usize>,
}

impl Subset {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    /// Builds a subset from arbitrary indices, checking each against `n`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(&index) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidSubset { index, n });
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(Self { indices })
    }

    /// The first `k` entries of a ranking, stored in index order.
    pub fn from_prefix(order: &[usize], k: usize) -> Self {
        let mut indices = order[..k].to_vec();
        indices.sort_unstable();
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.indices.binary_search(&arm).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn check(&self, n: usize) -> Result<()> {
        match self.indices.last() {
            Some(&index) if index >= n => Err(Error::InvalidSubset { index, n }),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for Subset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.indices.is_empty() {
            return write!(f, "∅");
        }
        write!(f, "{{")?;
        for (pos, index) in self.indices.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{index}")?;
        }
        write!(f, "}}")
    }
}

/// One step of an online run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index.
    pub t: usize,
    pub target: f64,
    pub selected: Subset,
    /// Responses of the selected arms, aligned with `selected.indices()`.
    pub responses: Vec<bool>,
    pub realized_loss: f64,
    pub expected_loss: f64,
    pub optimal_expected_loss: f64,
    pub pseudo_regret: f64,
}

impl StepRecord {
    pub fn new(
        t: usize,
        target: f64,
        selected: Subset,
        responses: Vec<bool>,
        expected_loss: f64,
        optimal_expected_loss: f64,
    ) -> Self {
        let realized_loss = realized_loss(&responses, target);
        let pseudo_regret = clamp_regret(expected_loss - optimal_expected_loss);
        Self {
            t,
            target,
            selected,
            responses,
            realized_loss,
            expected_loss,
            optimal_expected_loss,
            pseudo_regret,
        }
    }

    pub fn delivered(&self) -> usize {
        self.responses.iter().filter(|&&x| x).count()
    }

    /// Signed relative reduction error `(Σ X − D) / D`.
    pub fn relative_error(&self) -> f64 {
        (self.delivered() as f64 - self.target) / self.target
    }

    pub fn check_invariants(&self) -> bool {
        let gap = self.expected_loss - self.optimal_expected_loss;
        self.responses.len() == self.selected.len()
            && gap >= -1e-9
            && self.pseudo_regret >= 0.0
            && (self.realized_loss - realized_loss(&self.responses, self.target)).abs() <= TOLERANCE
    }
}

/// Rounding can push `E L(S) − E L(S*)` a hair below zero; the oracle value is
/// a true minimum, so anything negative is noise.
pub(crate) fn clamp_regret(gap: f64) -> f64 {
    gap.max(0.0)
}

/// Exact expected loss `(Σ p_i − D)² + Σ p_i (1 − p_i)` over `S`.
pub fn expected_loss(p: &ProbabilityProfile, subset: &Subset, target: f64) -> Result<f64> {
    subset.check(p.n())?;
    Ok(expected_loss_unchecked(p.probs(), subset.indices(), target))
}

pub(crate) fn expected_loss_unchecked(probs: &[f64], indices: &[usize], target: f64) -> f64 {
    let (mean, variance) = indices.iter().fold((0.0, 0.0), |(m, v), &i| {
        let q = probs[i];
        (m + q, v + q * (1.0 - q))
    });
    (mean - target).powi(2) + variance
}

/// Realized loss `(Σ X − D)²`.
pub fn realized_loss(responses: &[bool], target: f64) -> f64 {
    let delivered = responses.iter().filter(|&&x| x).count() as f64;
    (delivered - target).powi(2)
}
