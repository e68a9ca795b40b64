use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown user {0}")]
    NotFound(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Conflict(String),
    #[error("cloud sink failed: {0}")]
    Sink(String),
    #[error("snapshot integrity check failed: {0}")]
    Integrity(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    /// Short machine-readable kind used in JSON error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Invalid(_) => "bad_request",
            ServiceError::Conflict(_) => "conflict",
            ServiceError::Sink(_) => "sink_unavailable",
            ServiceError::Integrity(_) => "integrity",
            ServiceError::Config(_) => "config",
            ServiceError::Io(_) => "io",
        }
    }
}

impl From<fogtrace_core::ModelError> for ServiceError {
    fn from(e: fogtrace_core::ModelError) -> Self {
        ServiceError::Invalid(e.to_string())
    }
}

impl From<fogtrace_core::ConfigError> for ServiceError {
    fn from(e: fogtrace_core::ConfigError) -> Self {
        ServiceError::Config(e.to_string())
    }
}
