//! Output bundle: per-step CSV, summary JSON and run manifest.
//!
//! Every float goes out with six decimals so golden files stay stable.
//! Only the manifest carries a timestamp.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use crate::analysis::{epsilon0_general, epsilon1, Summary};
use crate::config::ExperimentConfig;
use crate::runner::{replicate_profile, resolve_targets, PolicyRun, SweepCell};
use crate::Result;

/// Profiles up to this size get ε₀/ε₁ diagnostics in the summary.
pub const DIAGNOSTIC_MAX_ARMS: usize = 20;
/// Curves longer than this are thinned to evenly spaced samples.
const MAX_CURVE_SAMPLES: usize = 200;

pub const STEPS_HEADER: &str =
    "t,policy,replicate,target,selected,realized_loss,pseudo_regret,relative_error";

fn round6(x: f64) -> f64 {
    if x.is_finite() {
        (x * 1e6).round() / 1e6
    } else {
        x
    }
}

fn float_json(x: f64) -> Value {
    if x.is_finite() {
        json!(round6(x))
    } else {
        Value::String(format!("{x}"))
    }
}

/// Writes one row per (policy, replicate, step).
pub fn write_steps_csv<W: Write>(mut out: W, runs: &[PolicyRun]) -> Result<()> {
    writeln!(out, "{STEPS_HEADER}")?;
    for run in runs {
        for rep in &run.runs {
            for row in &rep.rows {
                writeln!(
                    out,
                    "{},{},{},{:.6},{},{:.6},{:.6},{:.6}",
                    row.t,
                    run.policy,
                    rep.replicate,
                    row.target,
                    row.selected,
                    row.realized_loss,
                    row.pseudo_regret,
                    row.relative_error
                )?;
            }
        }
    }
    Ok(())
}

/// 1-based steps at which curves are reported.
pub fn sample_steps(horizon: usize) -> Vec<usize> {
    if horizon <= MAX_CURVE_SAMPLES {
        return (1..=horizon).collect();
    }
    let mut steps: Vec<usize> = (1..=MAX_CURVE_SAMPLES)
        .map(|i| (i * horizon).div_ceil(MAX_CURVE_SAMPLES))
        .collect();
    steps.dedup();
    steps
}

fn curve(values: &[f64], steps: &[usize]) -> Value {
    Value::Array(steps.iter().map(|&t| float_json(values[t - 1])).collect())
}

fn summary_json(summary: &Summary) -> Value {
    let steps = sample_steps(summary.horizon);
    json!({
        "replicates": summary.replicates,
        "horizon": summary.horizon,
        "final_mean_cumulative_regret": float_json(summary.final_mean_cumulative()),
        "steps": steps,
        "mean_cumulative_regret": curve(&summary.mean_cumulative, &steps),
        "cumulative_regret_p05": curve(&summary.cumulative_lo, &steps),
        "cumulative_regret_p95": curve(&summary.cumulative_hi, &steps),
        "mean_relative_error": curve(&summary.mean_relative_error, &steps),
        "relative_error_p05": curve(&summary.relative_error_lo, &steps),
        "relative_error_p95": curve(&summary.relative_error_hi, &steps),
        "mean_relative_deviation": curve(&summary.mean_relative_deviation, &steps),
    })
}

/// ε₀ (general form, first target) and ε₁ of replicate 0's profile.
pub fn diagnostics(config: &ExperimentConfig) -> Result<Value> {
    if config.n > DIAGNOSTIC_MAX_ARMS {
        return Ok(Value::Null);
    }
    let profile = replicate_profile(config, 0)?;
    let target = resolve_targets(config)?.first();
    let eps0 = epsilon0_general(&profile, target);
    let eps1 = epsilon1(&profile).ok();
    Ok(json!({
        "replicate": 0,
        "target": float_json(target),
        "epsilon0": float_json(eps0.epsilon0),
        "a1_a2_hold": eps0.a1_a2_hold,
        "l1": eps0.l1,
        "l2": eps0.l2,
        "k1": eps0.k1,
        "k2": eps0.k2,
        "epsilon1": eps1.map(float_json).unwrap_or(Value::Null),
    }))
}

fn config_json(config: &ExperimentConfig) -> Result<Value> {
    Ok(json!({
        "text": config.to_text(),
        "resolved": serde_json::to_value(config)?,
    }))
}

pub fn policies_json(runs: &[PolicyRun]) -> Value {
    Value::Array(
        runs.iter()
            .map(|run| {
                let mut block = summary_json(&run.summary);
                block["policy"] = json!(run.policy.name());
                block
            })
            .collect(),
    )
}

pub fn run_summary(config: &ExperimentConfig, runs: &[PolicyRun]) -> Result<Value> {
    Ok(json!({
        "config": config_json(config)?,
        "policies": policies_json(runs),
        "diagnostics": diagnostics(config)?,
    }))
}

pub fn manifest(config: &ExperimentConfig, command: &str) -> Value {
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "master_seed": config.master_seed,
        "replicates": config.replicates,
        "rng": "ChaCha8, stream = replicate << 8 | purpose",
        "created_unix": created,
    })
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `steps.csv`, `summary.json` and `manifest.json` into `dir`.
pub fn write_bundle(dir: &Path, config: &ExperimentConfig, runs: &[PolicyRun], command: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let file = fs::File::create(dir.join("steps.csv"))?;
    let mut writer = std::io::BufWriter::new(file);
    write_steps_csv(&mut writer, runs)?;
    writer.flush()?;
    write_json(&dir.join("summary.json"), &run_summary(config, runs)?)?;
    write_json(&dir.join("manifest.json"), &manifest(config, command))?;
    Ok(())
}

/// Sweep bundle: `sweep.csv` with one row per (value, policy) plus JSON.
pub fn write_sweep(dir: &Path, config: &ExperimentConfig, cells: &[SweepCell]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut table = String::from(
        "axis,value,master_seed,policy,final_mean_cumulative_regret,final_mean_relative_deviation\n",
    );
    let mut blocks = Vec::new();
    for cell in cells {
        for run in &cell.results {
            let dev = run.summary.mean_relative_deviation.last().copied().unwrap_or(0.0);
            table.push_str(&format!(
                "{},{:.6},{},{},{:.6},{:.6}\n",
                match cell.axis {
                    crate::runner::SweepAxis::Alpha => "alpha",
                    crate::runner::SweepAxis::Arms => "n",
                },
                cell.value,
                cell.master_seed,
                run.policy,
                run.summary.final_mean_cumulative(),
                dev
            ));
        }
        blocks.push(json!({
            "value": float_json(cell.value),
            "master_seed": cell.master_seed,
            "policies": policies_json(&cell.results),
        }));
    }
    fs::write(dir.join("sweep.csv"), table)?;
    write_json(
        &dir.join("summary.json"),
        &json!({ "config": config_json(config)?, "cells": blocks }),
    )?;
    write_json(&dir.join("manifest.json"), &manifest(config, "sweep"))?;
    Ok(())
}
