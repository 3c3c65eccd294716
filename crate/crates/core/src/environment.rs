//! Simulated arm population with optional fatigue.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{ProbabilityProfile, Subset};
use crate::{Error, Result};

/// True fatigue ratios and consecutive-selection streaks of the population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatigueModel {
    ratios: Vec<f64>,
    streaks: Vec<u32>,
}

impl FatigueModel {
    pub fn new(ratios: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = ratios.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::InvalidParameter {
                name: "fatigue ratio",
                reason: format!("must lie in (0, 1], got {bad}"),
            });
        }
        let streaks = vec![0; ratios.len()];
        Ok(Self { ratios, streaks })
    }

    pub fn with_streaks(ratios: Vec<f64>, streaks: Vec<u32>) -> Result<Self> {
        if streaks.len() != ratios.len() {
            return Err(Error::LengthMismatch {
                expected: ratios.len(),
                actual: streaks.len(),
            });
        }
        let mut model = Self::new(ratios)?;
        model.streaks = streaks;
        Ok(model)
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn streaks(&self) -> &[u32] {
        &self.streaks
    }

    /// `p_i · f_i^{χ_i}`.
    pub fn effective(&self, arm: usize, p: f64) -> f64 {
        p * self.ratios[arm].powi(self.streaks[arm] as i32)
    }
}

/// Selected arms extend their streak; everyone else rests and resets.
pub fn advance_fatigue(fatigue: &FatigueModel, selected: &Subset) -> FatigueModel {
    let mut next = fatigue.clone();
    advance_in_place(&mut next, selected);
    next
}

fn advance_in_place(fatigue: &mut FatigueModel, selected: &Subset) {
    for (arm, streak) in fatigue.streaks.iter_mut().enumerate() {
        *streak = if selected.contains(arm) { *streak + 1 } else { 0 };
    }
}

/// Independent Bernoulli responses of the selected arms.
///
/// One uniform is drawn per arm of the whole population, selected or not, so
/// the response of arm `i` at a given step does not depend on which other
/// arms were chosen. Policies compared on the same stream therefore see the
/// same `X_{t,i}` for every arm they both pick.
pub fn sample_responses<R: Rng + ?Sized>(
    p: &ProbabilityProfile,
    selected: &Subset,
    fatigue: Option<&FatigueModel>,
    rng: &mut R,
) -> Result<Vec<bool>> {
    selected.check(p.n())?;
    let draws: Vec<f64> = (0..p.n()).map(|_| rng.random::<f64>()).collect();
    Ok(selected
        .iter()
        .map(|arm| {
            let prob = match fatigue {
                Some(model) => model.effective(arm, p.probs()[arm]),
                None => p.probs()[arm],
            };
            draws[arm] < prob
        })
        .collect())
}

/// Environment of one replicate: profile, optional fatigue, and its stream.
#[derive(Debug, Clone)]
pub struct Environment<R> {
    profile: ProbabilityProfile,
    fatigue: Option<FatigueModel>,
    rng: R,
}

impl<R: Rng> Environment<R> {
    pub fn new(profile: ProbabilityProfile, fatigue: Option<FatigueModel>, rng: R) -> Result<Self> {
        if let Some(model) = &fatigue {
            if model.ratios.len() != profile.n() {
                return Err(Error::LengthMismatch {
                    expected: profile.n(),
                    actual: model.ratios.len(),
                });
            }
        }
        Ok(Self {
            profile,
            fatigue,
            rng,
        })
    }

    pub fn profile(&self) -> &ProbabilityProfile {
        &self.profile
    }

    pub fn fatigue(&self) -> Option<&FatigueModel> {
        self.fatigue.as_ref()
    }

    /// Effective response probabilities at the current step.
    pub fn current_probabilities(&self) -> Vec<f64> {
        match &self.fatigue {
            Some(model) => (0..self.profile.n())
                .map(|arm| model.effective(arm, self.profile.probs()[arm]))
                .collect(),
            None => self.profile.probs().to_vec(),
        }
    }

    /// Draws responses for `selected`, then advances fatigue streaks.
    pub fn step(&mut self, selected: &Subset) -> Result<Vec<bool>> {
        let responses =
            sample_responses(&self.profile, selected, self.fatigue.as_ref(), &mut self.rng)?;
        if let Some(model) = &mut self.fatigue {
            advance_in_place(model, selected);
        }
        Ok(responses)
    }
}
