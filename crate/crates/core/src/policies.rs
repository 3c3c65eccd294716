//! Online selection policies.
//!
//! Every policy implements [`Policy`]: `select` picks the subset for step `t`
//! and `observe` consumes the semi-bandit feedback of the selected arms. The
//! free functions below are the per-step selection rules on explicit state so
//! they can be exercised without a running loop.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::model::{ProbabilityProfile, Subset};
use crate::oracle::{offline_select, rank_descending, threshold_count};
use crate::{Error, Result};

/// Selection count and running sum of observations for one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ArmStats {
    pub count: u64,
    pub sum: f64,
}

impl ArmStats {
    pub fn new(count: u64, sum: f64) -> Self {
        Self { count, sum }
    }

    /// Sample average, or `None` before the first observation.
    pub fn average(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }

    pub fn record(&mut self, value: f64) {
        self.count += 1;
        self.sum += value;
    }
}

/// Beta posterior over one arm's response probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPosterior {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for BetaPosterior {
    /// Unif[0, 1] prior.
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

impl BetaPosterior {
    pub fn record(&mut self, success: bool) {
        if success {
            self.alpha += 1.0;
        } else {
            self.beta += 1.0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    Greedy,
    Cucb,
    CucbAvg,
    Thompson,
    CmvUcbAvg,
    FatigueCucbAvg,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Greedy,
        PolicyKind::Cucb,
        PolicyKind::CucbAvg,
        PolicyKind::Thompson,
        PolicyKind::CmvUcbAvg,
        PolicyKind::FatigueCucbAvg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Greedy => "greedy",
            PolicyKind::Cucb => "cucb",
            PolicyKind::CucbAvg => "cucb-avg",
            PolicyKind::Thompson => "ts",
            PolicyKind::CmvUcbAvg => "cmv-ucb-avg",
            PolicyKind::FatigueCucbAvg => "fatigue-cucb-avg",
        }
    }

    /// Thompson sampling starts from its prior; every other policy needs one
    /// observation per arm first.
    pub fn needs_initialization(self) -> bool {
        self != PolicyKind::Thompson
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let found = match key.as_str() {
            "greedy" => PolicyKind::Greedy,
            "cucb" => PolicyKind::Cucb,
            "cucb-avg" | "cucbavg" => PolicyKind::CucbAvg,
            "ts" | "thompson" => PolicyKind::Thompson,
            "cmv-ucb-avg" | "cmvucbavg" => PolicyKind::CmvUcbAvg,
            "fatigue-cucb-avg" | "fatiguecucbavg" => PolicyKind::FatigueCucbAvg,
            _ => {
                return Err(Error::UnknownPolicy {
                    name: s.to_string(),
                    valid: Self::valid_names(),
                })
            }
        };
        Ok(found)
    }
}

/// Knobs shared by the policy family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    /// Exploration weight of the confidence radius.
    pub alpha: f64,
    /// Mean-variance tradeoff, CMV-UCB-Avg only.
    pub rho: f64,
    /// Estimated fatigue ratios, fatigue-aware CUCB-Avg only.
    pub fatigue_estimates: Option<Vec<f64>>,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            alpha: 2.5,
            rho: 0.0,
            fatigue_estimates: None,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must be >= 0, got {}", self.alpha),
            });
        }
        if self.rho.is_nan() || self.rho < 0.0 {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("must be >= 0, got {}", self.rho),
            });
        }
        if let Some(est) = &self.fatigue_estimates {
            if let Some(bad) = est.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
                return Err(Error::InvalidParameter {
                    name: "fatigue_estimates",
                    reason: format!("ratios must lie in (0, 1], got {bad}"),
                });
            }
        }
        Ok(())
    }
}

/// A selected subset together with the ranking that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub subset: Subset,
    /// Arms by ranking score, best first.
    pub order: Vec<usize>,
    /// Length of the selected prefix of `order`.
    pub k: usize,
}

impl Selection {
    fn from_order(order: Vec<usize>, k: usize) -> Self {
        Self {
            subset: Subset::from_prefix(&order, k),
            order,
            k,
        }
    }
}

/// `√(α log t / (2 T_i))`.
pub fn confidence_radius(log_t: f64, count: u64, alpha: f64) -> f64 {
    (alpha * log_t / (2.0 * count as f64)).sqrt()
}

fn log_step(t: u64) -> f64 {
    (t.max(1) as f64).ln()
}

fn initialized_average(stats: &ArmStats, arm: usize) -> Result<f64> {
    stats.average().ok_or(Error::UninitializedArm(arm))
}

fn averages(stats: &[ArmStats]) -> Result<Vec<f64>> {
    stats
        .iter()
        .enumerate()
        .map(|(arm, s)| initialized_average(s, arm))
        .collect()
}

/// Upper confidence bound `min(p̄_i + √(α log t / (2 T_i)), 1)`.
pub fn ucb_index(stats: &ArmStats, t: u64, alpha: f64) -> Result<f64> {
    ucb_of(stats, 0, log_step(t), alpha)
}

fn ucb_of(stats: &ArmStats, arm: usize, log_t: f64, alpha: f64) -> Result<f64> {
    let mean = initialized_average(stats, arm)?;
    Ok((mean + confidence_radius(log_t, stats.count, alpha)).min(1.0))
}

fn ucb_vector(stats: &[ArmStats], t: u64, alpha: f64) -> Result<Vec<f64>> {
    let log_t = log_step(t);
    stats
        .iter()
        .enumerate()
        .map(|(arm, s)| ucb_of(s, arm, log_t, alpha))
        .collect()
}

/// Ranks by `scores`, then sizes the prefix against `target − 1/2` using
/// `values`.
pub fn rank_then_threshold<R: Rng + ?Sized>(
    scores: &[f64],
    values: &[f64],
    target: f64,
    rng: &mut R,
) -> Selection {
    let order = rank_descending(scores, rng);
    let k = threshold_count(&order, values, target);
    Selection::from_order(order, k)
}

/// CUCB-Avg: rank by UCB, count by sample averages.
pub fn cucb_avg_select<R: Rng + ?Sized>(
    stats: &[ArmStats],
    target: f64,
    t: u64,
    alpha: f64,
    rng: &mut R,
) -> Result<Selection> {
    let upper = ucb_vector(stats, t, alpha)?;
    let means = averages(stats)?;
    Ok(rank_then_threshold(&upper, &means, target, rng))
}

/// CUCB: the offline oracle run on the UCB vector.
pub fn cucb_select<R: Rng + ?Sized>(
    stats: &[ArmStats],
    target: f64,
    t: u64,
    alpha: f64,
    rng: &mut R,
) -> Result<Selection> {
    let upper = ucb_vector(stats, t, alpha)?;
    Ok(rank_then_threshold(&upper, &upper, target, rng))
}

/// Greedy: the offline oracle run on sample averages.
pub fn greedy_select<R: Rng + ?Sized>(
    stats: &[ArmStats],
    target: f64,
    rng: &mut R,
) -> Result<Selection> {
    let means = averages(stats)?;
    Ok(rank_then_threshold(&means, &means, target, rng))
}

/// Thompson sampling: draw `p̂` from the posteriors and run the oracle on it.
pub fn ts_select<R: Rng + ?Sized>(
    posteriors: &[BetaPosterior],
    target: f64,
    rng: &mut R,
) -> Result<Selection> {
    let sample = posteriors
        .iter()
        .map(|post| {
            Beta::new(post.alpha, post.beta)
                .map(|dist| dist.sample(rng))
                .map_err(|e| Error::InvalidParameter {
                    name: "posterior",
                    reason: e.to_string(),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    let profile = ProbabilityProfile::new(sample)?;
    let result = offline_select(&profile, target, rng)?;
    Ok(Selection {
        subset: result.subset,
        order: result.sorted_order,
        k: result.k,
    })
}

/// Mean-variance UCB index `min(p̄ − ρ p̄(1 − p̄) + √(α log t / (2 T_i)), 1)`.
pub fn cmv_index(stats: &ArmStats, t: u64, alpha: f64, rho: f64) -> Result<f64> {
    cmv_of(stats, 0, log_step(t), alpha, rho)
}

fn cmv_of(stats: &ArmStats, arm: usize, log_t: f64, alpha: f64, rho: f64) -> Result<f64> {
    let mean = initialized_average(stats, arm)?;
    let score = mean - rho * mean * (1.0 - mean) + confidence_radius(log_t, stats.count, alpha);
    Ok(score.min(1.0))
}

/// CMV-UCB-Avg: rank by the mean-variance index, count by sample averages.
pub fn cmv_ucb_avg_select<R: Rng + ?Sized>(
    stats: &[ArmStats],
    target: f64,
    t: u64,
    alpha: f64,
    rho: f64,
    rng: &mut R,
) -> Result<Selection> {
    let log_t = log_step(t);
    let scores = stats
        .iter()
        .enumerate()
        .map(|(arm, s)| cmv_of(s, arm, log_t, alpha, rho))
        .collect::<Result<Vec<f64>>>()?;
    let means = averages(stats)?;
    Ok(rank_then_threshold(&scores, &means, target, rng))
}

/// Per-arm state of the fatigue-aware variant.
///
/// `stats.sum` accumulates de-fatigued observations `X / f̃^χ`, with `χ` the
/// streak at the time the observation was made.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FatigueArm {
    pub stats: ArmStats,
    /// Consecutive steps the arm has been selected, up to the previous step.
    pub streak: u32,
}

impl FatigueArm {
    /// Rescaled sample average clamped to `[0, 1]`.
    fn rescaled_average(&self, arm: usize) -> Result<f64> {
        Ok(initialized_average(&self.stats, arm)?.clamp(0.0, 1.0))
    }
}

/// Fatigue-aware CUCB-Avg.
///
/// Ranks by `f̃^χ · U_i` and sizes the prefix with `f̃^χ · p̄_i`, both built
/// on the clamped rescaled average `p̄_i`.
pub fn fatigue_select<R: Rng + ?Sized>(
    arms: &[FatigueArm],
    estimates: &[f64],
    target: f64,
    t: u64,
    alpha: f64,
    rng: &mut R,
) -> Result<Selection> {
    if estimates.len() != arms.len() {
        return Err(Error::LengthMismatch {
            expected: arms.len(),
            actual: estimates.len(),
        });
    }
    let log_t = log_step(t);
    let mut scores = Vec::with_capacity(arms.len());
    let mut values = Vec::with_capacity(arms.len());
    for (arm, (state, &ratio)) in arms.iter().zip(estimates).enumerate() {
        let mean = state.rescaled_average(arm)?;
        let upper = (mean + confidence_radius(log_t, state.stats.count, alpha)).min(1.0);
        let decay = ratio.powi(state.streak as i32);
        scores.push(decay * upper);
        values.push(decay * mean);
    }
    Ok(rank_then_threshold(&scores, &values, target, rng))
}

fn check_feedback(selected: &Subset, responses: &[bool], n: usize) -> Result<()> {
    if selected.len() != responses.len() {
        return Err(Error::LengthMismatch {
            expected: selected.len(),
            actual: responses.len(),
        });
    }
    selected.check(n)
}

/// Semi-bandit update: selected arms gain one observation each.
pub fn update(stats: &mut [ArmStats], selected: &Subset, responses: &[bool]) -> Result<()> {
    check_feedback(selected, responses, stats.len())?;
    for (arm, &x) in selected.iter().zip(responses) {
        stats[arm].record(if x { 1.0 } else { 0.0 });
    }
    Ok(())
}

/// Conjugate Beta-Bernoulli update of the selected arms.
pub fn update_posteriors(
    posteriors: &mut [BetaPosterior],
    selected: &Subset,
    responses: &[bool],
) -> Result<()> {
    check_feedback(selected, responses, posteriors.len())?;
    for (arm, &x) in selected.iter().zip(responses) {
        posteriors[arm].record(x);
    }
    Ok(())
}

/// Fatigue-aware update: de-fatigue the observation, then advance streaks
/// (selected arms `+1`, everyone else resets to 0).
pub fn update_fatigue(
    arms: &mut [FatigueArm],
    estimates: &[f64],
    selected: &Subset,
    responses: &[bool],
) -> Result<()> {
    check_feedback(selected, responses, arms.len())?;
    for (arm, &x) in selected.iter().zip(responses) {
        let state = &mut arms[arm];
        let decay = estimates[arm].powi(state.streak as i32);
        state.stats.record(if x { 1.0 / decay } else { 0.0 });
    }
    for (arm, state) in arms.iter_mut().enumerate() {
        state.streak = if selected.contains(arm) {
            state.streak + 1
        } else {
            0
        };
    }
    Ok(())
}

/// Initialization rounds: consecutive blocks of `⌈2D⌉` arms covering every
/// arm exactly once; the final block may be shorter.
pub fn initialization_plan(n: usize, target: f64) -> Vec<Subset> {
    let width = ((2.0 * target).ceil() as usize).max(1);
    (0..n)
        .step_by(width)
        .map(|start| {
            let block = (start..n.min(start + width)).collect();
            Subset::new(block, n).expect("block indices are below n")
        })
        .collect()
}

/// Uniform interface over the online policies.
pub trait Policy: Send {
    fn kind(&self) -> PolicyKind;

    /// Picks the subset for the 1-based step `t`.
    fn select(&mut self, t: u64, target: f64, rng: &mut dyn RngCore) -> Result<Selection>;

    fn observe(&mut self, selected: &Subset, responses: &[bool]) -> Result<()>;
}

/// Greedy, CUCB, CUCB-Avg and CMV-UCB-Avg share the count/sum state.
#[derive(Debug, Clone)]
pub struct UcbFamily {
    kind: PolicyKind,
    alpha: f64,
    rho: f64,
    stats: Vec<ArmStats>,
}

impl UcbFamily {
    pub fn stats(&self) -> &[ArmStats] {
        &self.stats
    }
}

impl Policy for UcbFamily {
    fn kind(&self) -> PolicyKind {
        self.kind
    }

    fn select(&mut self, t: u64, target: f64, rng: &mut dyn RngCore) -> Result<Selection> {
        match self.kind {
            PolicyKind::Greedy => greedy_select(&self.stats, target, rng),
            PolicyKind::Cucb => cucb_select(&self.stats, target, t, self.alpha, rng),
            PolicyKind::CmvUcbAvg => {
                cmv_ucb_avg_select(&self.stats, target, t, self.alpha, self.rho, rng)
            }
            _ => cucb_avg_select(&self.stats, target, t, self.alpha, rng),
        }
    }

    fn observe(&mut self, selected: &Subset, responses: &[bool]) -> Result<()> {
        update(&mut self.stats, selected, responses)
    }
}

#[derive(Debug, Clone)]
pub struct Thompson {
    posteriors: Vec<BetaPosterior>,
}

impl Thompson {
    pub fn posteriors(&self) -> &[BetaPosterior] {
        &self.posteriors
    }
}

impl Policy for Thompson {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Thompson
    }

    fn select(&mut self, _t: u64, target: f64, rng: &mut dyn RngCore) -> Result<Selection> {
        ts_select(&self.posteriors, target, rng)
    }

    fn observe(&mut self, selected: &Subset, responses: &[bool]) -> Result<()> {
        update_posteriors(&mut self.posteriors, selected, responses)
    }
}

#[derive(Debug, Clone)]
pub struct FatigueCucbAvg {
    alpha: f64,
    estimates: Vec<f64>,
    arms: Vec<FatigueArm>,
}

impl FatigueCucbAvg {
    pub fn arms(&self) -> &[FatigueArm] {
        &self.arms
    }
}

impl Policy for FatigueCucbAvg {
    fn kind(&self) -> PolicyKind {
        PolicyKind::FatigueCucbAvg
    }

    fn select(&mut self, t: u64, target: f64, rng: &mut dyn RngCore) -> Result<Selection> {
        fatigue_select(&self.arms, &self.estimates, target, t, self.alpha, rng)
    }

    fn observe(&mut self, selected: &Subset, responses: &[bool]) -> Result<()> {
        update_fatigue(&mut self.arms, &self.estimates, selected, responses)
    }
}

/// Builds a fresh policy over `n` arms.
pub fn build_policy(kind: PolicyKind, n: usize, config: &PolicyConfig) -> Result<Box<dyn Policy>> {
    config.validate()?;
    let policy: Box<dyn Policy> = match kind {
        PolicyKind::Thompson => Box::new(Thompson {
            posteriors: vec![BetaPosterior::default(); n],
        }),
        PolicyKind::FatigueCucbAvg => {
            let estimates = config.fatigue_estimates.clone().ok_or(Error::InvalidParameter {
                name: "fatigue_estimates",
                reason: "fatigue-aware policy needs estimated ratios".into(),
            })?;
            if estimates.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: estimates.len(),
                });
            }
            Box::new(FatigueCucbAvg {
                alpha: config.alpha,
                estimates,
                arms: vec![FatigueArm::default(); n],
            })
        }
        _ => Box::new(UcbFamily {
            kind,
            alpha: config.alpha,
            rho: config.rho,
            stats: vec![ArmStats::default(); n],
        }),
    };
    Ok(policy)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(5)
    }

    /// Stats whose sample average is exactly `mean` with a huge count.
    fn exact(mean: f64) -> ArmStats {
        let count = 1u64 << 40;
        ArmStats::new(count, mean * count as f64)
    }

    #[test]
    fn ucb_examples() {
        let s = ArmStats::new(100, 20.0);
        let radius = confidence_radius(2.0, 100, 2.0);
        assert!((0.2f64 + radius - 0.341_421_356_237_309_5).abs() < 1e-12);

        // log t = 1 at t = e; use the radius directly, then clamp through the index.
        assert_eq!((0.3 + confidence_radius(1.0, 1, 2.0)).min(1.0), 1.0);
        assert_eq!(ucb_index(&ArmStats::new(1, 0.3), 3, 2.0).unwrap(), 1.0);

        let big = ArmStats::new(1_000_000_000, 500_000_000.0);
        let u = ucb_index(&big, 1000, 2.5).unwrap();
        assert!((u - 0.5).abs() < 2e-4);

        assert!(ucb_index(&s, 10, 2.0).unwrap() <= 1.0);
    }

    #[test]
    fn ucb_rejects_unobserved_arm() {
        assert!(matches!(
            ucb_index(&ArmStats::default(), 4, 2.0),
            Err(Error::UninitializedArm(_))
        ));
        let stats = [ArmStats::new(1, 1.0), ArmStats::default()];
        assert!(matches!(
            cucb_avg_select(&stats, 1.0, 3, 2.0, &mut rng()),
            Err(Error::UninitializedArm(1))
        ));
    }

    #[test]
    fn ucb_zero_alpha_is_clamped_average() {
        let s = ArmStats::new(7, 3.0);
        assert_eq!(ucb_index(&s, 50, 0.0).unwrap(), 3.0 / 7.0);
    }

    #[test]
    fn cucb_avg_thresholds_on_averages() {
        // All radii vanish, so the U-order follows the averages [a, b, c].
        let stats = [exact(0.6), exact(0.3), exact(0.1)];
        let sel = cucb_avg_select(&stats, 1.0, 2, 0.0, &mut rng()).unwrap();
        assert_eq!(sel.order, vec![0, 1, 2]);
        // 0.6 already exceeds D − 1/2 = 0.5.
        assert_eq!(sel.subset.indices(), &[0]);
        // D − 1/2 = 0.7 sits between 0.6 and 0.9.
        let sel = cucb_avg_select(&stats, 1.2, 2, 0.0, &mut rng()).unwrap();
        assert_eq!(sel.subset.indices(), &[0, 1]);

        let sel = cucb_avg_select(&stats, 0.4, 2, 2.5, &mut rng()).unwrap();
        assert!(sel.subset.is_empty());

        let sel = cucb_avg_select(&stats, 5.0, 2, 2.5, &mut rng()).unwrap();
        assert_eq!(sel.subset, Subset::full(3));
    }

    #[test]
    fn cucb_runs_oracle_on_ucb() {
        // U = [1.0, 1.0, 0.2]
        let stats = [exact(1.0), exact(1.0), exact(0.2)];
        let sel = cucb_select(&stats, 1.0, 2, 0.0, &mut rng()).unwrap();
        assert_eq!(sel.k, 1);
        assert!(sel.subset.indices()[0] < 2);
        assert!(cucb_select(&stats, 0.4, 2, 0.0, &mut rng())
            .unwrap()
            .subset
            .is_empty());

        let tied = [exact(0.5), exact(0.5), exact(0.5), exact(0.5)];
        let a = cucb_select(&tied, 1.2, 2, 0.0, &mut rng()).unwrap();
        let b = cucb_select(&tied, 1.2, 2, 0.0, &mut rng()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.k, 2);
    }

    #[test]
    fn greedy_examples() {
        let stats = [ArmStats::new(1, 0.9), ArmStats::new(1, 0.0)];
        assert_eq!(
            greedy_select(&stats, 1.0, &mut rng()).unwrap().subset.indices(),
            &[0]
        );
        let zeros = [ArmStats::new(1, 0.0), ArmStats::new(1, 0.0)];
        assert_eq!(
            greedy_select(&zeros, 1.0, &mut rng()).unwrap().subset,
            Subset::full(2)
        );
        assert!(greedy_select(&stats, 0.3, &mut rng()).unwrap().subset.is_empty());
    }

    #[test]
    fn ts_examples() {
        let prior = vec![BetaPosterior::default(); 8];
        let a = ts_select(&prior, 2.0, &mut rng()).unwrap();
        let b = ts_select(&prior, 2.0, &mut rng()).unwrap();
        assert_eq!(a, b);

        let mut posts = vec![
            BetaPosterior {
                alpha: 1.0,
                beta: 1e6
            };
            4
        ];
        posts[0] = BetaPosterior {
            alpha: 1e6,
            beta: 1.0,
        };
        let mut r = rng();
        let hits = (0..1000)
            .filter(|_| ts_select(&posts, 1.0, &mut r).unwrap().subset.indices() == [0])
            .count();
        assert!(hits >= 999, "hits = {hits}");

        assert!(ts_select(&prior, 0.3, &mut rng()).unwrap().subset.is_empty());
    }

    #[test]
    fn cmv_examples() {
        let stats = [ArmStats::new(3, 1.0), ArmStats::new(5, 4.0), ArmStats::new(2, 1.0)];
        let plain = cucb_avg_select(&stats, 1.3, 9, 2.5, &mut rng()).unwrap();
        let mv = cmv_ucb_avg_select(&stats, 1.3, 9, 2.5, 0.0, &mut rng()).unwrap();
        assert_eq!(plain, mv);

        let same_radius = [ArmStats::new(10, 5.0), ArmStats::new(10, 9.0)];
        let sel = cmv_ucb_avg_select(&same_radius, 1.0, 10, 2.5, 10.0, &mut rng()).unwrap();
        assert_eq!(sel.order[0], 1);
        assert!(cmv_index(&same_radius[0], 10, 2.5, 10.0).unwrap() < 0.0);

        assert!(cmv_ucb_avg_select(&stats, 0.4, 9, 2.5, 1.0, &mut rng())
            .unwrap()
            .subset
            .is_empty());
    }

    #[test]
    fn fatigue_examples() {
        let stats = [ArmStats::new(3, 2.0), ArmStats::new(4, 1.0), ArmStats::new(2, 1.0)];
        let fresh: Vec<FatigueArm> = stats.iter().map(|&s| FatigueArm { stats: s, streak: 0 }).collect();
        let base = cucb_avg_select(&stats, 1.3, 9, 2.5, &mut rng()).unwrap();
        let fat = fatigue_select(&fresh, &[0.8, 0.8, 0.8], 1.3, 9, 2.5, &mut rng()).unwrap();
        assert_eq!(base, fat);

        let streaky: Vec<FatigueArm> = stats.iter().map(|&s| FatigueArm { stats: s, streak: 4 }).collect();
        let unit = fatigue_select(&streaky, &[1.0; 3], 1.3, 9, 2.5, &mut rng()).unwrap();
        assert_eq!(base, unit);

        // f̃ = 0.5 and χ = 2 quarter the score of an arm with U = 1.
        let arms = [
            FatigueArm {
                stats: ArmStats::new(1, 1.0),
                streak: 2,
            },
            FatigueArm {
                stats: exact(0.3),
                streak: 0,
            },
        ];
        let sel = fatigue_select(&arms, &[0.5, 0.5], 5.0, 100, 2.5, &mut rng()).unwrap();
        // 0.25 < 0.3 + tiny radius, so arm 1 ranks first.
        assert_eq!(sel.order, vec![1, 0]);
        assert_eq!(0.5f64.powi(2), 0.25);
    }

    #[test]
    fn update_examples() {
        let mut stats = [ArmStats::new(3, 2.0), ArmStats::new(1, 0.0)];
        let sel = Subset::new(vec![0], 2).unwrap();
        update(&mut stats, &sel, &[true]).unwrap();
        assert_eq!(stats[0], ArmStats::new(4, 3.0));
        assert_eq!(stats[1], ArmStats::new(1, 0.0));
        assert!(matches!(
            update(&mut stats, &sel, &[true, false]),
            Err(Error::LengthMismatch { .. })
        ));

        let mut posts = [BetaPosterior::default()];
        update_posteriors(&mut posts, &Subset::full(1), &[false]).unwrap();
        assert_eq!(posts[0], BetaPosterior { alpha: 1.0, beta: 2.0 });

        let mut arms = [
            FatigueArm {
                stats: ArmStats::new(1, 1.0),
                streak: 2,
            },
            FatigueArm {
                stats: ArmStats::new(1, 1.0),
                streak: 0,
            },
        ];
        update_fatigue(&mut arms, &[0.5, 0.5], &Subset::new(vec![1], 2).unwrap(), &[true]).unwrap();
        assert_eq!(arms[0].streak, 0);
        assert_eq!(arms[1].streak, 1);
        update_fatigue(&mut arms, &[0.5, 0.5], &Subset::new(vec![1], 2).unwrap(), &[true]).unwrap();
        // Observed at streak 1, so the success counts as 1 / 0.5.
        assert_eq!(arms[1].stats, ArmStats::new(3, 4.0));
    }

    #[test]
    fn initialization_examples() {
        let plan = initialization_plan(5, 1.0);
        let got: Vec<Vec<usize>> = plan.iter().map(|s| s.indices().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 1], vec![2, 3], vec![4]]);
        assert_eq!(initialization_plan(3, 2.0), vec![Subset::full(3)]);
        assert_eq!(initialization_plan(1, 0.6), vec![Subset::full(1)]);
        assert_eq!(initialization_plan(7, 0.2).len(), 7);
    }

    #[test]
    fn policy_names_round_trip() {
        for kind in PolicyKind::ALL {
            assert_eq!(kind.name().parse::<PolicyKind>().unwrap(), kind);
        }
        let err = "ucb2".parse::<PolicyKind>().unwrap_err();
        assert!(err.to_string().contains("cucb-avg"));
    }

    #[test]
    fn build_checks_fatigue_estimates() {
        let cfg = PolicyConfig::default();
        assert!(build_policy(PolicyKind::FatigueCucbAvg, 3, &cfg).is_err());
        let cfg = PolicyConfig {
            fatigue_estimates: Some(vec![0.85; 3]),
            ..PolicyConfig::default()
        };
        assert!(build_policy(PolicyKind::FatigueCucbAvg, 3, &cfg).is_ok());
        let bad = PolicyConfig {
            alpha: -1.0,
            ..PolicyConfig::default()
        };
        assert!(build_policy(PolicyKind::CucbAvg, 3, &bad).is_err());
    }
}
