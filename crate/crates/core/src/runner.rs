//! Replicate loop, paired policy comparisons and parameter sweeps.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{aggregate, RegretSeries, Summary};
use crate::config::{ExperimentConfig, FatigueEstimate, LoadSource, ProfileSource, TargetSpec};
use crate::environment::{Environment, FatigueModel};
use crate::ingest::{average_peak_target, daily_peak_targets, synth_load, LoadProfile};
use crate::model::{expected_loss_unchecked, ProbabilityProfile, StepRecord, TargetKind, TargetSchedule};
use crate::oracle::offline_select_stable;
use crate::policies::{build_policy, initialization_plan, PolicyConfig, PolicyKind};
use crate::rng::{Purpose, RngStream};
use crate::{Error, Result};

/// Materializes the configured target scheme over the horizon.
pub fn resolve_targets(config: &ExperimentConfig) -> Result<TargetSchedule> {
    let load = |source: &LoadSource| -> Result<LoadProfile> {
        match source {
            LoadSource::Synthetic(params) => Ok(synth_load(*params)),
            LoadSource::Csv(path) => LoadProfile::load(path),
        }
    };
    match &config.target {
        TargetSpec::Static(d) => TargetSchedule::constant(*d, config.horizon),
        TargetSpec::AveragePeak { load: src, fraction } => {
            average_peak_target(&load(src)?, *fraction, config.horizon)
        }
        TargetSpec::DailyPeak { load: src, fraction } => daily_peak_targets(&load(src)?, *fraction),
    }
}

/// Hidden profile of one replicate. Uniform profiles come from a dedicated
/// stream, so every policy in a comparison faces the same population.
pub fn replicate_profile(config: &ExperimentConfig, replicate: u64) -> Result<ProbabilityProfile> {
    match &config.profile {
        ProfileSource::Explicit(p) => ProbabilityProfile::new(p.clone()),
        ProfileSource::Uniform => {
            let mut rng = RngStream::new(config.master_seed, replicate, Purpose::Profile).rng();
            ProbabilityProfile::new((0..config.n).map(|_| rng.random::<f64>()).collect())
        }
    }
}

fn replicate_fatigue(
    config: &ExperimentConfig,
    replicate: u64,
) -> Result<Option<(FatigueModel, Vec<f64>)>> {
    let Some(spec) = &config.fatigue else {
        return Ok(None);
    };
    let mut rng = RngStream::new(config.master_seed, replicate, Purpose::Fatigue).rng();
    let ratios: Vec<f64> = (0..config.n)
        .map(|_| {
            if spec.low == spec.high {
                spec.low
            } else {
                rng.random_range(spec.low..=spec.high)
            }
        })
        .collect();
    let estimates = match spec.estimate {
        FatigueEstimate::Exact => ratios.clone(),
        FatigueEstimate::Constant(c) => vec![c; config.n],
    };
    Ok(Some((FatigueModel::new(ratios)?, estimates)))
}

/// Compact per-step row kept for CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub t: usize,
    pub target: f64,
    pub selected: usize,
    pub realized_loss: f64,
    pub pseudo_regret: f64,
    pub relative_error: f64,
}

impl From<&StepRecord> for StepRow {
    fn from(r: &StepRecord) -> Self {
        Self {
            t: r.t,
            target: r.target,
            selected: r.selected.len(),
            realized_loss: r.realized_loss,
            pseudo_regret: r.pseudo_regret,
            relative_error: r.relative_error(),
        }
    }
}

/// Runs one replicate, handing every step to `observer`.
///
/// Policies other than Thompson sampling first play the initialization
/// rounds sized by the first target; those steps count toward `t` and incur
/// regret like any other.
pub fn run_replicate(
    config: &ExperimentConfig,
    schedule: &TargetSchedule,
    replicate: u64,
    observer: &mut dyn FnMut(&StepRecord),
) -> Result<RegretSeries> {
    config.validate()?;
    let profile = replicate_profile(config, replicate)?;
    let n = profile.n();
    let fatigue = replicate_fatigue(config, replicate)?;
    if config.policy == PolicyKind::FatigueCucbAvg && fatigue.is_none() {
        return Err(Error::ConfigField {
            field: "fatigue".into(),
            message: "fatigue-aware policy without a fatigue model".into(),
        });
    }

    let (model, estimates) = match fatigue {
        Some((model, est)) => (Some(model), Some(est)),
        None => (None, None),
    };
    let policy_config = PolicyConfig {
        fatigue_estimates: estimates.filter(|_| config.policy == PolicyKind::FatigueCucbAvg),
        ..config.policy_config()
    };
    let mut policy = build_policy(config.policy, n, &policy_config)?;
    let mut policy_rng = RngStream::new(config.master_seed, replicate, Purpose::Policy).rng();
    let env_rng = RngStream::new(config.master_seed, replicate, Purpose::Environment).rng();
    let mut env = Environment::new(profile, model, env_rng)?;

    let plan = if config.policy.needs_initialization() {
        initialization_plan(n, schedule.first())
    } else {
        Vec::new()
    };
    let cache_optimum = schedule.kind() == TargetKind::Static && env.fatigue().is_none();
    let mut cached: Option<f64> = None;

    let mut series = RegretSeries::with_capacity(config.horizon);
    for t in 1..=config.horizon {
        let target = schedule.at(t);
        let selected = match plan.get(t - 1) {
            Some(round) => round.clone(),
            None => policy.select(t as u64, target, &mut policy_rng)?.subset,
        };

        let current = env.current_probabilities();
        let played = expected_loss_unchecked(&current, selected.indices(), target);
        let optimum = match cached {
            Some(v) => v,
            None => {
                let v = offline_select_stable(&ProbabilityProfile::new(current)?, target)?
                    .expected_loss;
                if cache_optimum {
                    cached = Some(v);
                }
                v
            }
        };

        let responses = env.step(&selected)?;
        policy.observe(&selected, &responses)?;

        let record = StepRecord::new(t, target, selected, responses, played, optimum);
        debug_assert!(record.check_invariants(), "bad step record {record:?}");
        series.push(record.pseudo_regret, played, target, record.delivered());
        observer(&record);
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRun {
    pub replicate: u64,
    pub series: RegretSeries,
    /// Per-step rows, present when requested.
    pub rows: Vec<StepRow>,
}

/// Runs every replicate on the current rayon pool. Results come back in
/// replicate order whatever the degree of parallelism.
pub fn run_replicates(
    config: &ExperimentConfig,
    schedule: &TargetSchedule,
    keep_rows: bool,
) -> Result<Vec<ReplicateRun>> {
    (0..config.replicates as u64)
        .into_par_iter()
        .map(|replicate| {
            let mut rows = Vec::new();
            let series = run_replicate(config, schedule, replicate, &mut |rec| {
                if keep_rows {
                    rows.push(StepRow::from(rec));
                }
            })?;
            Ok(ReplicateRun {
                replicate,
                series,
                rows,
            })
        })
        .collect()
}

/// Aggregated outcome of one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRun {
    pub policy: PolicyKind,
    pub summary: Summary,
    pub runs: Vec<ReplicateRun>,
}

pub fn run_policy(config: &ExperimentConfig, keep_rows: bool) -> Result<PolicyRun> {
    let schedule = resolve_targets(config)?;
    let runs = run_replicates(config, &schedule, keep_rows)?;
    let series: Vec<RegretSeries> = runs.iter().map(|r| r.series.clone()).collect();
    Ok(PolicyRun {
        policy: config.policy,
        summary: aggregate(&series)?,
        runs,
    })
}

/// Paired comparison: all configs share seeds, so populations and response
/// streams coincide across policies.
pub fn run_comparison(configs: &[ExperimentConfig], keep_rows: bool) -> Result<Vec<PolicyRun>> {
    let first = configs.first().ok_or(Error::EmptyValues)?;
    if let Some(other) = configs.iter().find(|c| c.horizon != first.horizon) {
        return Err(Error::HorizonMismatch(first.horizon, other.horizon));
    }
    configs.iter().map(|c| run_policy(c, keep_rows)).collect()
}

/// `config` with the policy swapped, one per entry of `policies`.
pub fn comparison_configs(config: &ExperimentConfig, policies: &[PolicyKind]) -> Vec<ExperimentConfig> {
    policies
        .iter()
        .map(|&policy| ExperimentConfig {
            policy,
            ..config.clone()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    Alpha,
    Arms,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepAxis::Alpha),
            "n" => Ok(SweepAxis::Arms),
            _ => Err(Error::InvalidParameter {
                name: "axis",
                reason: format!("`{s}` is not one of alpha, n"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub axis: SweepAxis,
    pub value: f64,
    pub master_seed: u64,
    pub results: Vec<PolicyRun>,
}

/// One comparison per value; cell `i` runs with `master_seed + i`.
pub fn sweep(
    config: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    policies: &[PolicyKind],
    keep_rows: bool,
) -> Result<Vec<SweepCell>> {
    if values.is_empty() {
        return Err(Error::EmptyValues);
    }
    values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            let mut cell = config.clone();
            cell.master_seed = config.master_seed.wrapping_add(index as u64);
            match axis {
                SweepAxis::Alpha => cell.alpha = value,
                SweepAxis::Arms => {
                    if value < 1.0 || value.fract() != 0.0 {
                        return Err(Error::InvalidParameter {
                            name: "n",
                            reason: format!("`{value}` is not a positive integer"),
                        });
                    }
                    cell.n = value as usize;
                }
            }
            cell.validate()?;
            let results = run_comparison(&comparison_configs(&cell, policies), keep_rows)?;
            Ok(SweepCell {
                axis,
                value,
                master_seed: cell.master_seed,
                results,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            n: 2,
            horizon: 20,
            replicates: 1,
            policy: PolicyKind::CucbAvg,
            alpha: 2.5,
            rho: 0.0,
            target: TargetSpec::Static(2.0),
            profile: ProfileSource::Explicit(vec![1.0, 1.0]),
            fatigue: None,
            master_seed: 3,
        }
    }

    #[test]
    fn deterministic_arms_have_zero_regret() {
        let cfg = base();
        let schedule = resolve_targets(&cfg).unwrap();
        let series = run_replicate(&cfg, &schedule, 0, &mut |_| {}).unwrap();
        assert!(series.per_step.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn horizon_shorter_than_initialization() {
        let cfg = ExperimentConfig {
            n: 6,
            horizon: 3,
            target: TargetSpec::Static(1.0),
            profile: ProfileSource::Uniform,
            ..base()
        };
        let schedule = resolve_targets(&cfg).unwrap();
        let mut sizes = Vec::new();
        let series = run_replicate(&cfg, &schedule, 0, &mut |r| sizes.push(r.selected.len())).unwrap();
        assert_eq!(series.len(), 3);
        assert_eq!(sizes, vec![2, 2, 2]);
    }

    #[test]
    fn repeat_runs_are_identical() {
        let cfg = ExperimentConfig {
            n: 8,
            horizon: 60,
            replicates: 3,
            profile: ProfileSource::Uniform,
            ..base()
        };
        let a = run_policy(&cfg, true).unwrap();
        let b = run_policy(&cfg, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fatigue_policy_needs_model() {
        let cfg = ExperimentConfig {
            policy: PolicyKind::FatigueCucbAvg,
            ..base()
        };
        assert!(run_policy(&cfg, false).is_err());
    }

    #[test]
    fn comparison_rejects_mismatched_horizons() {
        let a = base();
        let b = ExperimentConfig {
            horizon: 5,
            ..base()
        };
        assert!(matches!(
            run_comparison(&[a, b], false),
            Err(Error::HorizonMismatch(20, 5))
        ));
    }

    #[test]
    fn sweep_validates_values() {
        assert!(matches!(
            sweep(&base(), SweepAxis::Alpha, &[], &[PolicyKind::CucbAvg], false),
            Err(Error::EmptyValues)
        ));
        let cfg = ExperimentConfig {
            profile: ProfileSource::Uniform,
            ..base()
        };
        let cells = sweep(&cfg, SweepAxis::Arms, &[3.0, 5.0], &[PolicyKind::CucbAvg], false).unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[1].value, 5.0);
        assert_eq!(cells[1].master_seed, 4);
        assert!(sweep(&cfg, SweepAxis::Arms, &[2.5], &[PolicyKind::CucbAvg], false).is_err());
    }
}
