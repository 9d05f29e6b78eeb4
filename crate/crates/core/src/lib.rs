//! Time-of-arrival target tracking by online gradient descent.
//!
//! The core types are generic over the floating-point scalar ([`Scalar`],
//! implemented for `f32` and `f64`); the `*64` aliases below cover the common
//! double-precision case.

// `!(x > 0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod linalg;
pub mod loss;
pub mod metrics;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use estimators::{Method, OracleConfig, TrackerState};
pub use geometry::{MeasurementFrame, NoiseKind, NoiseSchedule, SensorArray, Trajectory};
pub use linalg::{Matrix, Vector};
pub use loss::LossSnapshot;
pub use metrics::RunMetrics;
pub use scalar::Scalar;

pub type Vector64 = Vector<f64>;
pub type Matrix64 = Matrix<f64>;
pub type SensorArray64 = SensorArray<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type NoiseSchedule64 = NoiseSchedule<f64>;
pub type MeasurementFrame64 = MeasurementFrame<f64>;
pub type LossSnapshot64<'a> = LossSnapshot<'a, f64>;
pub type TrackerState64 = TrackerState<f64>;
pub type OracleConfig64 = OracleConfig<f64>;
pub type RunMetrics64 = RunMetrics<f64>;
pub type ConvexityConfig64 = analysis::ConvexityConfig<f64>;
pub type ConvexityReport64 = analysis::ConvexityReport<f64>;

pub type Vector32 = Vector<f32>;
pub type SensorArray32 = SensorArray<f32>;
pub type Trajectory32 = Trajectory<f32>;
pub type MeasurementFrame32 = MeasurementFrame<f32>;
pub type TrackerState32 = TrackerState<f32>;
