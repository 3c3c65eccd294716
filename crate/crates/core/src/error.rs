use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {value} for arm {arm} is outside [0, 1]")]
    InvalidProbability { arm: usize, value: f64 },

    #[error("a probability profile needs at least one arm")]
    EmptyProfile,

    #[error("arm index {index} is out of range for {n} arms")]
    InvalidSubset { index: usize, n: usize },

    #[error("target must be strictly positive, got {0}")]
    InvalidTarget(f64),

    #[error("target {value} at step {step} exceeds the declared bound {bound}")]
    TargetAboveBound { step: usize, value: f64, bound: f64 },

    #[error("static schedule has unequal targets")]
    NonConstantStatic,

    #[error("arm {0} has not been observed yet; run the initialization phase first")]
    UninitializedArm(usize),

    #[error("brute force is limited to {limit} arms, got {n}")]
    TooManyArms { n: usize, limit: usize },

    #[error("expected {expected} responses, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("assumptions A1/A2 do not hold: {0}")]
    AssumptionViolated(String),

    #[error("all response probabilities are zero")]
    DegenerateProfile,

    #[error("no replicate series to aggregate")]
    EmptyAggregate,

    #[error("horizons differ: {0} vs {1}")]
    HorizonMismatch(usize, usize),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("day {day} ({label}) peaks at hour 0, no prior hour")]
    PeakAtHourZero { day: usize, label: String },

    #[error("load profile: {0}")]
    LoadFormat(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config field `{field}`: {message}")]
    ConfigField { field: String, message: String },

    #[error("unknown policy `{name}` (valid: {valid})")]
    UnknownPolicy { name: String, valid: String },

    #[error("empty value list")]
    EmptyValues,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
