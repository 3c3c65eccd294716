//! Experiment configuration and its flat `key = value` text form.
//!
//! ```text
//! # arms, horizon (steps = days), replicate count
//! n = 300
//! horizon = 122
//! replicates = 50
//! policy = cucb-avg
//! alpha = 2.5
//! profile = uniform            # or a comma list of probabilities
//! target = average-peak        # static | average-peak | daily-peak
//! target.fraction = 0.05
//! load.amplitude = 500         # MW
//! fatigue = on
//! fatigue.estimate = 0.85      # or `exact`
//! master_seed = 7
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::SynthLoad;
use crate::policies::{PolicyConfig, PolicyKind};
use crate::{Error, Result};

/// Environment variable overriding `master_seed`.
pub const SEED_ENV: &str = "BANDIT_DR_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProfileSource {
    /// Fresh i.i.d. Unif[0, 1] probabilities for every replicate.
    Uniform,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LoadSource {
    Synthetic(SynthLoad),
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TargetSpec {
    Static(f64),
    AveragePeak { load: LoadSource, fraction: f64 },
    DailyPeak { load: LoadSource, fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FatigueEstimate {
    /// The aggregator knows every true ratio.
    Exact,
    /// One population-wide guess.
    Constant(f64),
}

/// True ratios are i.i.d. Unif[low, high] per arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FatigueSpec {
    pub low: f64,
    pub high: f64,
    pub estimate: FatigueEstimate,
}

impl Default for FatigueSpec {
    fn default() -> Self {
        Self {
            low: 0.75,
            high: 0.95,
            estimate: FatigueEstimate::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub horizon: usize,
    pub replicates: usize,
    pub policy: PolicyKind,
    pub alpha: f64,
    pub rho: f64,
    pub target: TargetSpec,
    pub profile: ProfileSource,
    pub fatigue: Option<FatigueSpec>,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 10,
            horizon: 100,
            replicates: 1,
            policy: PolicyKind::CucbAvg,
            alpha: 2.5,
            rho: 0.0,
            target: TargetSpec::Static(1.0),
            profile: ProfileSource::Uniform,
            fatigue: None,
            master_seed: 0,
        }
    }
}

fn field(name: &str, message: impl Into<String>) -> Error {
    Error::ConfigField {
        field: name.to_string(),
        message: message.into(),
    }
}

fn parse_num<T: FromStr>(name: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| field(name, format!("`{value}` is not a valid number")))
}

fn parse_list(name: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|item| parse_num(name, item.trim()))
        .collect()
}

fn fmt_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

impl ExperimentConfig {
    pub fn policy_config(&self) -> PolicyConfig {
        PolicyConfig {
            alpha: self.alpha,
            rho: self.rho,
            fatigue_estimates: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(field("n", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(field("horizon", "must be at least 1"));
        }
        if self.replicates == 0 {
            return Err(field("replicates", "must be at least 1"));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(field("alpha", "must be >= 0"));
        }
        if self.rho.is_nan() || self.rho < 0.0 {
            return Err(field("rho", "must be >= 0"));
        }
        if let ProfileSource::Explicit(p) = &self.profile {
            if p.len() != self.n {
                return Err(field(
                    "profile",
                    format!("{} probabilities given for n = {}", p.len(), self.n),
                ));
            }
            if p.iter().any(|q| !(0.0..=1.0).contains(q)) {
                return Err(field("profile", "probabilities must lie in [0, 1]"));
            }
        }
        match &self.target {
            TargetSpec::Static(d) if d.is_nan() || *d <= 0.0 => {
                return Err(field("target.value", "must be > 0"));
            }
            TargetSpec::AveragePeak { fraction, load } | TargetSpec::DailyPeak { fraction, load } => {
                if !(*fraction > 0.0 && *fraction <= 1.0) {
                    return Err(field("target.fraction", "must lie in (0, 1]"));
                }
                if let LoadSource::Synthetic(s) = load {
                    if s.days == 0 {
                        return Err(field("load.days", "must be at least 1"));
                    }
                }
            }
            _ => {}
        }
        if let Some(f) = &self.fatigue {
            if !(f.low > 0.0 && f.low <= f.high && f.high <= 1.0) {
                return Err(field("fatigue.low", "need 0 < low <= high <= 1"));
            }
            if let FatigueEstimate::Constant(c) = f.estimate {
                if !(c > 0.0 && c <= 1.0) {
                    return Err(field("fatigue.estimate", "must lie in (0, 1]"));
                }
            }
        }
        if self.policy == PolicyKind::FatigueCucbAvg && self.fatigue.is_none() {
            return Err(field("policy", "fatigue-cucb-avg needs `fatigue = on`"));
        }
        Ok(())
    }

    /// Parses the key-value form. Unset keys keep their defaults; unknown
    /// keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut target_kind = "static".to_string();
        let mut target_value = 1.0;
        let mut fraction = 0.05;
        let mut load_path: Option<PathBuf> = None;
        let mut synth = SynthLoad {
            seed: 0,
            days: 0,
            base: 1000.0,
            peak_amplitude: 500.0,
        };
        let mut fatigue_on = false;
        let mut fatigue = FatigueSpec::default();

        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Config {
                line: index + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => cfg.n = parse_num(key, value)?,
                "horizon" => cfg.horizon = parse_num(key, value)?,
                "replicates" => cfg.replicates = parse_num(key, value)?,
                "policy" => cfg.policy = value.parse()?,
                "alpha" => cfg.alpha = parse_num(key, value)?,
                "rho" => cfg.rho = parse_num(key, value)?,
                "master_seed" => cfg.master_seed = parse_num(key, value)?,
                "profile" => {
                    cfg.profile = if value == "uniform" {
                        ProfileSource::Uniform
                    } else {
                        ProfileSource::Explicit(parse_list(key, value)?)
                    }
                }
                "target" => match value {
                    "static" | "average-peak" | "daily-peak" => target_kind = value.to_string(),
                    _ => {
                        return Err(field(
                            key,
                            format!("`{value}` is not one of static, average-peak, daily-peak"),
                        ))
                    }
                },
                "target.value" => target_value = parse_num(key, value)?,
                "target.fraction" => fraction = parse_num(key, value)?,
                "load.path" => load_path = Some(PathBuf::from(value)),
                "load.seed" => synth.seed = parse_num(key, value)?,
                "load.days" => synth.days = parse_num(key, value)?,
                "load.base" => synth.base = parse_num(key, value)?,
                "load.amplitude" => synth.peak_amplitude = parse_num(key, value)?,
                "fatigue" => {
                    fatigue_on = match value {
                        "on" | "true" => true,
                        "off" | "false" => false,
                        _ => return Err(field(key, "expected on or off")),
                    }
                }
                "fatigue.low" => fatigue.low = parse_num(key, value)?,
                "fatigue.high" => fatigue.high = parse_num(key, value)?,
                "fatigue.estimate" => {
                    fatigue.estimate = if value == "exact" {
                        FatigueEstimate::Exact
                    } else {
                        FatigueEstimate::Constant(parse_num(key, value)?)
                    }
                }
                _ => {
                    return Err(Error::Config {
                        line: index + 1,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }

        if synth.days == 0 {
            synth.days = if target_kind == "daily-peak" {
                cfg.horizon
            } else {
                122
            };
        }
        let load = match load_path {
            Some(path) => LoadSource::Csv(path),
            None => LoadSource::Synthetic(synth),
        };
        cfg.target = match target_kind.as_str() {
            "average-peak" => TargetSpec::AveragePeak { load, fraction },
            "daily-peak" => TargetSpec::DailyPeak { load, fraction },
            _ => TargetSpec::Static(target_value),
        };
        cfg.fatigue = fatigue_on.then_some(fatigue);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text form; parsing it yields an identical config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "horizon = {}", self.horizon);
        let _ = writeln!(out, "replicates = {}", self.replicates);
        let _ = writeln!(out, "policy = {}", self.policy);
        let _ = writeln!(out, "alpha = {:?}", self.alpha);
        let _ = writeln!(out, "rho = {:?}", self.rho);
        let _ = writeln!(out, "master_seed = {}", self.master_seed);
        match &self.profile {
            ProfileSource::Uniform => {
                let _ = writeln!(out, "profile = uniform");
            }
            ProfileSource::Explicit(p) => {
                let _ = writeln!(out, "profile = {}", fmt_list(p));
            }
        }
        let write_load = |out: &mut String, load: &LoadSource, fraction: f64| {
            let _ = writeln!(out, "target.fraction = {fraction:?}");
            match load {
                LoadSource::Synthetic(s) => {
                    let _ = writeln!(out, "load.seed = {}", s.seed);
                    let _ = writeln!(out, "load.days = {}", s.days);
                    let _ = writeln!(out, "load.base = {:?}", s.base);
                    let _ = writeln!(out, "load.amplitude = {:?}", s.peak_amplitude);
                }
                LoadSource::Csv(path) => {
                    let _ = writeln!(out, "load.path = {}", path.display());
                }
            }
        };
        match &self.target {
            TargetSpec::Static(d) => {
                let _ = writeln!(out, "target = static");
                let _ = writeln!(out, "target.value = {d:?}");
            }
            TargetSpec::AveragePeak { load, fraction } => {
                let _ = writeln!(out, "target = average-peak");
                write_load(&mut out, load, *fraction);
            }
            TargetSpec::DailyPeak { load, fraction } => {
                let _ = writeln!(out, "target = daily-peak");
                write_load(&mut out, load, *fraction);
            }
        }
        if let Some(f) = &self.fatigue {
            let _ = writeln!(out, "fatigue = on");
            let _ = writeln!(out, "fatigue.low = {:?}", f.low);
            let _ = writeln!(out, "fatigue.high = {:?}", f.high);
            match f.estimate {
                FatigueEstimate::Exact => {
                    let _ = writeln!(out, "fatigue.estimate = exact");
                }
                FatigueEstimate::Constant(c) => {
                    let _ = writeln!(out, "fatigue.estimate = {c:?}");
                }
            }
        }
        out
    }

    /// Applies `BANDIT_DR_SEED` when it is set.
    pub fn apply_seed_env(&mut self) -> Result<()> {
        if let Ok(value) = std::env::var(SEED_ENV) {
            self.master_seed = parse_num(SEED_ENV, value.trim())?;
        }
        Ok(())
    }
}
