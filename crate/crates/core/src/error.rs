use thiserror::Error;

use crate::constraints::ConstraintId;
use crate::dynamics::DeputyState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quaternion is not unit norm (|q| = {norm})")]
    InvalidQuaternion { norm: f64 },

    #[error("integration produced a non-finite state: {state:?}")]
    IntegrationFault { state: Box<DeputyState> },

    #[error("gradient of {constraint} is singular at this state")]
    GradientSingularity { constraint: ConstraintId },

    #[error("initialization failed after {attempts} resample attempts")]
    InitializationFailure { attempts: usize },

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("environment handle: {0}")]
    Handle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
