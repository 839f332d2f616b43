//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QqmError {
    #[error("zero quaternion has no inverse")]
    ZeroInverse,

    /// A named closed-form constraint failed during construction.
    #[error("{constraint} violated: {detail}")]
    Constraint { constraint: String, detail: String },

    #[error("non-finite sample at flat index {index}")]
    PoisonedSample { index: usize },

    #[error("grid too small: axis {axis} has {len} points, at least {min} required")]
    GridTooSmall { axis: usize, len: usize, min: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("evanescent regime: quaternionic energy {energy} does not exceed the step height {v0}")]
    Evanescent { energy: f64, v0: f64 },

    #[error("degenerate amplitude: {0}")]
    DegenerateAmplitude(String),

    #[error("undefined ratio: quaternionic energy is zero")]
    ZeroEnergyRatio,
}

impl QqmError {
    pub fn constraint(name: impl Into<String>, detail: impl Into<String>) -> Self {
        QqmError::Constraint {
            constraint: name.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, QqmError>;
