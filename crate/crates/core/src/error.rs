use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the probability model and its value types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("contact time must be non-negative, got {0} s")]
    NegativeContactTime(f64),
    #[error("threshold contact time must be positive, got {0} s")]
    NonPositiveTau0(f64),
    #[error("infection threshold must lie in (0, 1], got {0}")]
    InvalidTheta(f64),
    #[error("symptom flag must be 0 or 1, got {0}")]
    InvalidSymptomFlag(i64),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl ConfigError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        ConfigError::Invalid(msg.into())
    }
}

/// Errors raised while running the simulator.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("event on day {event_day} does not belong to simulation day {state_day}")]
    WrongDay { event_day: u32, state_day: u32 },
    #[error("event references unknown user {user} (population {population})")]
    UnknownUser { user: u32, population: u32 },
    #[error("event pairs user {0} with itself")]
    SelfMeetup(u32),
}

/// Errors raised while reading, comparing or writing series files.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("series have no overlapping days")]
    NoOverlap,
    #[error("no series to export")]
    NoSeries,
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
