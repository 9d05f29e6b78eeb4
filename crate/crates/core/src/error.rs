use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("need at least n + 1 = {required} sensors in dimension {dim}, got {count}")]
    TooFewSensors {
        count: usize,
        dim: usize,
        required: usize,
    },

    #[error("sensor differences do not span R^{dim} (singular value ratio {ratio:e})")]
    RankDeficient { dim: usize, ratio: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("query point within {distance:e} of sensor {sensor} (guard {guard:e})")]
    AnchorProximity {
        sensor: usize,
        distance: f64,
        guard: f64,
    },

    #[error("ball of radius {radius:e} contains sensor {sensor} (distance {distance:e})")]
    AnchorInBall {
        sensor: usize,
        distance: f64,
        radius: f64,
    },

    #[error("step size {eta:e} outside (0, 2/(mu + L)] = (0, {max:e}]")]
    StepSizeOutOfRange { eta: f64, max: f64 },

    #[error("vectors are linearly dependent (|sin angle| = {sin:e})")]
    LinearlyDependent { sin: f64 },

    #[error("zero vector where a nonzero one is required")]
    ZeroVector,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("window {window} invalid for series of length {len}")]
    InvalidWindow { window: usize, len: usize },

    #[error("singular linear system")]
    Singular,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
