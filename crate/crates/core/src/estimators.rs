//! Online trackers (gradient and Newton steps), the closed-form linearized
//! initializer, and the batch gradient-descent oracle for the per-step minimizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{MeasurementFrame, SensorArray};
use crate::linalg::{least_squares, solve, symmetric_eigenvalues, Matrix, Vector};
use crate::loss::LossSnapshot;
use crate::scalar::Scalar;

/// Hessians with a larger condition number are not inverted; the Newton
/// tracker takes a gradient step instead.
pub const NEWTON_CONDITION_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "OGD")]
    Ogd,
    #[serde(rename = "ONM")]
    Onm,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Ogd => "OGD",
            Method::Onm => "ONM",
        }
    }

    pub fn column_prefix(self) -> &'static str {
        match self {
            Method::Ogd => "ogd",
            Method::Onm => "onm",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "OGD" => Ok(Method::Ogd),
            "ONM" => Ok(Method::Onm),
            _ => Err(Error::param("method", format!("unknown method `{s}`"))),
        }
    }
}

/// Step size as a function of the 1-based time index.
pub trait StepSchedule<T> {
    fn step_size(&self, t: usize) -> T;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantStep<T>(pub T);

impl<T: Scalar> StepSchedule<T> for ConstantStep<T> {
    fn step_size(&self, _t: usize) -> T {
        self.0
    }
}

/// Tracker estimate carried from one time step to the next.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackerState<T> {
    pub estimate: Vector<T>,
    /// Gradient step size; the Newton tracker uses it only on fallback steps.
    pub step_size: T,
    pub method: Method,
    /// Newton steps replaced by gradient steps because the Hessian was
    /// too badly conditioned.
    pub fallback_count: usize,
}

impl<T: Scalar> TrackerState<T> {
    pub fn new(method: Method, estimate: Vector<T>, step_size: T) -> Result<Self> {
        if !(step_size > T::zero()) || !step_size.is_finite() {
            return Err(Error::param("step_size", "must be positive"));
        }
        Ok(TrackerState {
            estimate,
            step_size,
            method,
            fallback_count: 0,
        })
    }

    /// Advances by one step of this state's method.
    pub fn step(&self, s: &LossSnapshot<'_, T>) -> Result<Self> {
        match self.method {
            Method::Ogd => ogd_step(self, s),
            Method::Onm => onm_step(self, s),
        }
    }
}

/// `x_t = x_{t-1} - eta * grad f_t(x_{t-1})`
pub fn ogd_step<T: Scalar>(
    state: &TrackerState<T>,
    s: &LossSnapshot<'_, T>,
) -> Result<TrackerState<T>> {
    let g = s.gradient(&state.estimate)?;
    let mut next = state.clone();
    next.estimate.axpy(-state.step_size, &g);
    Ok(next)
}

/// `x_t = x_{t-1} - (hess f_t(x_{t-1}))^{-1} grad f_t(x_{t-1})`, solved as a
/// linear system. Falls back to a gradient step when the Hessian condition
/// number exceeds [`NEWTON_CONDITION_LIMIT`].
pub fn onm_step<T: Scalar>(
    state: &TrackerState<T>,
    s: &LossSnapshot<'_, T>,
) -> Result<TrackerState<T>> {
    let (g, h) = s.gradient_and_hessian(&state.estimate)?;
    let mut next = state.clone();
    match newton_direction(&h, &g) {
        Some(d) => next.estimate -= &d,
        None => {
            next.estimate.axpy(-state.step_size, &g);
            next.fallback_count += 1;
        }
    }
    Ok(next)
}

fn newton_direction<T: Scalar>(h: &Matrix<T>, g: &Vector<T>) -> Option<Vector<T>> {
    if g.max_abs() == T::zero() {
        return Some(Vector::zeros(g.dim()));
    }
    if condition_number(h) > T::of(NEWTON_CONDITION_LIMIT) {
        return None;
    }
    solve(h, g).ok()
}

/// `max |lambda| / min |lambda|` of a symmetric matrix; infinite when singular.
pub fn condition_number<T: Scalar>(h: &Matrix<T>) -> T {
    if !h.is_finite() {
        return T::infinity();
    }
    let eig = symmetric_eigenvalues(h);
    let (lo, hi) = eig.iter().fold((T::infinity(), T::zero()), |(lo, hi), e| {
        (lo.min(e.abs()), hi.max(e.abs()))
    });
    if lo == T::zero() {
        T::infinity()
    } else {
        hi / lo
    }
}

/// Closed-form initializer from differences of squared ranges between
/// consecutive sensors: rows `(a_{i+1} - a_i)^T`, right-hand side
/// `(||a_{i+1}||^2 - ||a_i||^2 + r_i^2 - r_{i+1}^2) / 2`.
pub fn ols_initialize<T: Scalar>(
    sensors: &SensorArray<T>,
    frame: &MeasurementFrame<T>,
) -> Result<Vector<T>> {
    if frame.ranges.len() != sensors.m() {
        return Err(Error::LengthMismatch {
            left: frame.ranges.len(),
            right: sensors.m(),
        });
    }
    let a = sensors.positions();
    let r = &frame.ranges;
    let half = T::of(0.5);
    let rows: Vec<Vector<T>> = a.windows(2).map(|w| &w[1] - &w[0]).collect();
    let rhs: Vec<T> = (0..a.len() - 1)
        .map(|i| {
            half * (a[i + 1].norm_squared() - a[i].norm_squared() + r[i] * r[i]
                - r[i + 1] * r[i + 1])
        })
        .collect();
    least_squares(&Matrix::from_rows(&rows)?, &Vector::new(rhs))
}

/// Protocol for computing the per-step least-squares estimate by
/// constant-step gradient descent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig<T> {
    pub step_size: T,
    pub gradient_tolerance: T,
    pub max_iterations: usize,
}

impl<T: Scalar> OracleConfig<T> {
    /// Step `1/m`, tolerance `1e-8`, at most 5000 iterations.
    pub fn for_sensors(m: usize) -> Self {
        OracleConfig {
            step_size: T::one() / T::of(m as f64),
            gradient_tolerance: T::of(1e-8),
            max_iterations: 5000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > T::zero()) {
            return Err(Error::param("step_size", "must be positive"));
        }
        if !(self.gradient_tolerance > T::zero()) {
            return Err(Error::param("gradient_tolerance", "must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Converged,
    IterationLimit,
    /// Stopped because an iterate came within the anchor guard of `sensor`.
    AnchorProximity {
        sensor: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleOutcome<T> {
    pub point: Vector<T>,
    pub gradient_norm: T,
    pub iterations: usize,
    pub termination: Termination,
}

impl<T> OracleOutcome<T> {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// Gradient descent on a single snapshot until `||grad|| < tolerance` or the
/// iteration cap. Hitting a sensor mid-run ends the run with the last good
/// iterate rather than an error.
pub fn batch_least_squares<T: Scalar>(
    s: &LossSnapshot<'_, T>,
    init: &Vector<T>,
    cfg: &OracleConfig<T>,
) -> Result<OracleOutcome<T>> {
    cfg.validate()?;
    let mut x = init.clone();
    let mut g = s.gradient(&x)?;
    let mut gnorm = g.norm();
    let mut iterations = 0;
    while gnorm >= cfg.gradient_tolerance {
        if iterations == cfg.max_iterations {
            return Ok(OracleOutcome {
                point: x,
                gradient_norm: gnorm,
                iterations,
                termination: Termination::IterationLimit,
            });
        }
        let mut next = x.clone();
        next.axpy(-cfg.step_size, &g);
        iterations += 1;
        match s.gradient(&next) {
            Ok(gn) => {
                x = next;
                g = gn;
                gnorm = g.norm();
            }
            Err(Error::AnchorProximity { sensor, .. }) => {
                return Ok(OracleOutcome {
                    point: next,
                    gradient_norm: T::nan(),
                    iterations,
                    termination: Termination::AnchorProximity { sensor },
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(OracleOutcome {
        point: x,
        gradient_norm: gnorm,
        iterations,
        termination: Termination::Converged,
    })
}

/// The first `steps + 1` iterates of constant-step gradient descent from `init`.
pub fn gradient_descent_path<T: Scalar>(
    s: &LossSnapshot<'_, T>,
    init: &Vector<T>,
    step_size: T,
    steps: usize,
) -> Result<Vec<Vector<T>>> {
    let mut path = Vec::with_capacity(steps + 1);
    path.push(init.clone());
    for k in 0..steps {
        let g = s.gradient(&path[k])?;
        let mut next = path[k].clone();
        next.axpy(-step_size, &g);
        path.push(next);
    }
    Ok(path)
}
