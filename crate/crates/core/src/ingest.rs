//! Hourly load profiles and peak-shaving targets.
//!
//! CSV layout: header `date,h0,...,h23`, one row per day, `.` as the decimal
//! separator.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{TargetKind, TargetSchedule};
use crate::rng::{Purpose, RngStream};
use crate::{Error, Result};

pub const HOURS: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub dates: Vec<String>,
    /// Hourly load in MW, one 24-entry row per day.
    pub days: Vec<[f64; HOURS]>,
}

impl LoadProfile {
    pub fn new(dates: Vec<String>, days: Vec<[f64; HOURS]>) -> Result<Self> {
        if dates.len() != days.len() {
            return Err(Error::LoadFormat(format!(
                "{} date labels for {} days",
                dates.len(),
                days.len()
            )));
        }
        for (day, row) in days.iter().enumerate() {
            if let Some(h) = row.iter().position(|&x| !x.is_finite() || x < 0.0) {
                return Err(Error::LoadFormat(format!(
                    "day {} hour {h}: load must be a non-negative number",
                    dates[day]
                )));
            }
        }
        Ok(Self { dates, days })
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    /// Per-hour arithmetic mean over all days.
    pub fn averaged(&self) -> [f64; HOURS] {
        let mut mean = [0.0; HOURS];
        for row in &self.days {
            for (acc, &x) in mean.iter_mut().zip(row) {
                *acc += x;
            }
        }
        let count = self.days.len().max(1) as f64;
        mean.iter_mut().for_each(|x| *x /= count);
        mean
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = csv.headers()?.clone();
        let expected: Vec<String> = std::iter::once("date".to_string())
            .chain((0..HOURS).map(|h| format!("h{h}")))
            .collect();
        if header.iter().ne(expected.iter().map(String::as_str)) {
            return Err(Error::LoadFormat(
                "header must be `date,h0,...,h23`".to_string(),
            ));
        }
        let mut dates = Vec::new();
        let mut days = Vec::new();
        for (line, record) in csv.records().enumerate() {
            let record = record?;
            let mut row = [0.0; HOURS];
            for (h, slot) in row.iter_mut().enumerate() {
                let field = record.get(h + 1).unwrap_or_default();
                *slot = field.parse().map_err(|_| {
                    Error::LoadFormat(format!("row {}: h{h} `{field}` is not a number", line + 2))
                })?;
            }
            dates.push(record.get(0).unwrap_or_default().to_string());
            days.push(row);
        }
        Self::new(dates, days)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend((0..HOURS).map(|h| format!("h{h}")));
        csv.write_record(&header)?;
        for (date, row) in self.dates.iter().zip(&self.days) {
            let mut record = vec![date.clone()];
            record.extend(row.iter().map(|x| format!("{x:?}")));
            csv.write_record(&record)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Earliest hour attaining the maximum.
fn peak_hour(row: &[f64; HOURS]) -> usize {
    let mut best = 0;
    for h in 1..HOURS {
        if row[h] > row[best] {
            best = h;
        }
    }
    best
}

/// Peak load minus the load one hour earlier, or `None` for an hour-0 peak.
fn peak_ramp(row: &[f64; HOURS]) -> Option<f64> {
    let h = peak_hour(row);
    (h > 0).then(|| row[h] - row[h - 1])
}

fn check_fraction(fraction: f64) -> Result<()> {
    if fraction > 0.0 && fraction <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "fraction",
            reason: format!("must lie in (0, 1], got {fraction}"),
        })
    }
}

/// Static target from the averaged daily profile, replicated over `horizon`.
pub fn average_peak_target(
    profile: &LoadProfile,
    fraction: f64,
    horizon: usize,
) -> Result<TargetSchedule> {
    check_fraction(fraction)?;
    if profile.is_empty() {
        return Err(Error::LoadFormat("profile has no days".into()));
    }
    let mean = profile.averaged();
    let ramp = peak_ramp(&mean).ok_or_else(|| Error::PeakAtHourZero {
        day: 0,
        label: "averaged profile".into(),
    })?;
    TargetSchedule::constant(fraction * ramp, horizon)
}

/// One target per day from that day's own peak ramp.
pub fn daily_peak_targets(profile: &LoadProfile, fraction: f64) -> Result<TargetSchedule> {
    check_fraction(fraction)?;
    if profile.is_empty() {
        return Err(Error::LoadFormat("profile has no days".into()));
    }
    let targets = profile
        .days
        .iter()
        .enumerate()
        .map(|(day, row)| {
            peak_ramp(row)
                .map(|ramp| fraction * ramp)
                .ok_or_else(|| Error::PeakAtHourZero {
                    day,
                    label: profile.dates[day].clone(),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    let bound = targets.iter().copied().fold(0.0, f64::max);
    TargetSchedule::new(targets, TargetKind::TimeVarying, bound)
}

/// Parameters of the synthetic load generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthLoad {
    pub seed: u64,
    pub days: usize,
    pub base: f64,
    pub peak_amplitude: f64,
}

/// Width (hours) of the evening bump.
const BUMP_WIDTH: f64 = 2.5;
/// Per-day scale of the bump is drawn from this range.
const DAY_SCALE: (f64, f64) = (0.45, 0.95);
/// Hourly noise is uniform in `±NOISE · amplitude`.
const NOISE: f64 = 0.005;

/// Smooth diurnal curve: `base` plus a Gaussian evening bump peaking at hour
/// 17, 18 or 19, scaled per day, plus small uniform noise. Every term except
/// `base` scales with `peak_amplitude`, so amplitude 0 is perfectly flat and
/// the peak ramp is linear in the amplitude.
///
/// Daily peaks stay inside `base + amplitude · [0.4, 1.0]`.
pub fn synth_load(params: SynthLoad) -> LoadProfile {
    let mut rng = RngStream::new(params.seed, 0, Purpose::Load).rng();
    let mut dates = Vec::with_capacity(params.days);
    let mut days = Vec::with_capacity(params.days);
    for day in 0..params.days {
        let center = 17.0 + rng.random_range(0..3) as f64;
        let scale = rng.random_range(DAY_SCALE.0..DAY_SCALE.1);
        let mut row = [0.0; HOURS];
        for (h, slot) in row.iter_mut().enumerate() {
            let bump = (-(h as f64 - center).powi(2) / (2.0 * BUMP_WIDTH * BUMP_WIDTH)).exp();
            let noise = rng.random_range(-NOISE..NOISE);
            *slot = params.base + params.peak_amplitude * (scale * bump + noise);
        }
        dates.push(format!("day{:05}", day + 1));
        days.push(row);
    }
    LoadProfile { dates, days }
}
