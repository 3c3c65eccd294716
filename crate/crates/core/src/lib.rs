//! Reliability-aware combinatorial multi-armed bandits.
//!
//! An aggregator picks a subset of Bernoulli arms (customers) each step so
//! that the realized number of responses tracks a target `D_t`. The crate
//! contains the exact offline oracle, the online policies (CUCB-Avg and its
//! baselines), the robustness constants used by the regret analysis, load
//! profile ingestion for peak-shaving targets, and a replicate runner.

pub mod analysis;
pub mod config;
pub mod environment;
pub mod error;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod output;
pub mod policies;
pub mod rng;
pub mod runner;

pub use error::{Error, Result};
pub use model::{expected_loss, realized_loss, ProbabilityProfile, StepRecord, Subset, TargetKind, TargetSchedule};
pub use oracle::{brute_force_optimal, offline_select, OracleResult};
pub use rng::{Purpose, RngStream};

/// Absolute tolerance used for floating-point equality throughout the crate.
pub const TOLERANCE: f64 = 1e-12;
