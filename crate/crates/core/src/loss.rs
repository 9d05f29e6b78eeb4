//! Per-step non-convex least-squares loss
//! `f_t(x) = sum_i (||x - a_i|| - r_i)^2` with analytic derivatives.
//!
//! The loss is smooth away from the sensors. Gradient and Hessian refuse to
//! evaluate within `anchor_guard` of any sensor instead of returning NaNs.

use crate::error::{Error, Result};
use crate::geometry::{MeasurementFrame, SensorArray};
use crate::linalg::{Matrix, Vector};
use crate::scalar::Scalar;

pub const DEFAULT_ANCHOR_GUARD: f64 = 1e-9;

/// The loss bound to one sensor layout and one frame of ranges.
#[derive(Clone, Copy, Debug)]
pub struct LossSnapshot<'a, T> {
    sensors: &'a SensorArray<T>,
    frame: &'a MeasurementFrame<T>,
    anchor_guard: T,
}

impl<'a, T: Scalar> LossSnapshot<'a, T> {
    pub fn new(sensors: &'a SensorArray<T>, frame: &'a MeasurementFrame<T>) -> Result<Self> {
        Self::with_guard(sensors, frame, T::of(DEFAULT_ANCHOR_GUARD))
    }

    pub fn with_guard(
        sensors: &'a SensorArray<T>,
        frame: &'a MeasurementFrame<T>,
        anchor_guard: T,
    ) -> Result<Self> {
        if frame.ranges.len() != sensors.m() {
            return Err(Error::LengthMismatch {
                left: frame.ranges.len(),
                right: sensors.m(),
            });
        }
        if !(anchor_guard > T::zero()) {
            return Err(Error::param("anchor_guard", "must be positive"));
        }
        Ok(LossSnapshot {
            sensors,
            frame,
            anchor_guard,
        })
    }

    pub fn sensors(&self) -> &'a SensorArray<T> {
        self.sensors
    }

    pub fn frame(&self) -> &'a MeasurementFrame<T> {
        self.frame
    }

    pub fn anchor_guard(&self) -> T {
        self.anchor_guard
    }

    pub fn dim(&self) -> usize {
        self.sensors.n()
    }

    pub fn distances(&self, x: &Vector<T>) -> Result<Vec<T>> {
        self.sensors.check_dim(x)?;
        Ok(self.sensors.distances(x))
    }

    /// `||x - a_i|| - r_i` for each sensor.
    pub fn residuals(&self, x: &Vector<T>) -> Result<Vec<T>> {
        Ok(self
            .distances(x)?
            .into_iter()
            .zip(&self.frame.ranges)
            .map(|(d, &r)| d - r)
            .collect())
    }

    /// Loss value; defined everywhere, including at the sensors.
    pub fn value(&self, x: &Vector<T>) -> Result<T> {
        Ok(self.residuals(x)?.into_iter().map(|e| e * e).sum())
    }

    /// `2 sum_i (1 - r_i/||x - a_i||) (x - a_i)`
    pub fn gradient(&self, x: &Vector<T>) -> Result<Vector<T>> {
        self.sensors.check_dim(x)?;
        let two = T::of(2.0);
        let mut g = Vector::zeros(x.dim());
        for (i, (a, &r)) in self
            .sensors
            .positions()
            .iter()
            .zip(&self.frame.ranges)
            .enumerate()
        {
            let diff = x - a;
            let d = self.guarded_norm(i, &diff)?;
            g.axpy(two * (T::one() - r / d), &diff);
        }
        Ok(g)
    }

    /// `2 sum_i [ (r_i/||x - a_i||^3) (x - a_i)(x - a_i)^T + (1 - r_i/||x - a_i||) I ]`
    pub fn hessian(&self, x: &Vector<T>) -> Result<Matrix<T>> {
        Ok(self.gradient_and_hessian(x)?.1)
    }

    /// Gradient and Hessian in one pass over the sensors.
    pub fn gradient_and_hessian(&self, x: &Vector<T>) -> Result<(Vector<T>, Matrix<T>)> {
        self.sensors.check_dim(x)?;
        let n = x.dim();
        let two = T::of(2.0);
        let mut g = Vector::zeros(n);
        let mut h = Matrix::zeros(n, n);
        let mut diag = T::zero();
        for (i, (a, &r)) in self
            .sensors
            .positions()
            .iter()
            .zip(&self.frame.ranges)
            .enumerate()
        {
            let diff = x - a;
            let d = self.guarded_norm(i, &diff)?;
            let shrink = T::one() - r / d;
            g.axpy(two * shrink, &diff);
            h.add_outer(two * r / (d * d * d), &diff, &diff);
            diag += two * shrink;
        }
        h.add_diagonal(diag);
        Ok((g, h))
    }

    fn guarded_norm(&self, sensor: usize, diff: &Vector<T>) -> Result<T> {
        let d = diff.norm();
        if d > self.anchor_guard {
            Ok(d)
        } else {
            Err(Error::AnchorProximity {
                sensor,
                distance: d.to_f64_lossy(),
                guard: self.anchor_guard.to_f64_lossy(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_sensors() -> SensorArray<f64> {
        SensorArray::from_coords(&[vec![0.5, 0.5], vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap()
    }

    fn v(c: &[f64]) -> Vector<f64> {
        Vector::from_slice(c)
    }

    #[test]
    fn zero_at_truth_for_exact_ranges() {
        let s = paper_sensors();
        let x = v(&[2.0, 1.0]);
        let f = MeasurementFrame::exact(&s, &x, 1);
        let loss = LossSnapshot::new(&s, &f).unwrap();
        assert_eq!(loss.value(&x).unwrap(), 0.0);
        assert_eq!(loss.gradient(&x).unwrap(), Vector::zeros(2));
    }

    #[test]
    fn uniform_offset_value() {
        let s = paper_sensors();
        let x = v(&[2.0, 1.0]);
        let mut f = MeasurementFrame::exact(&s, &x, 1);
        f.ranges.iter_mut().for_each(|r| *r += 0.1);
        let loss = LossSnapshot::new(&s, &f).unwrap();
        assert!((loss.value(&x).unwrap() - 0.03).abs() < 1e-15);
    }

    #[test]
    fn value_at_origin() {
        let s = paper_sensors();
        let f = MeasurementFrame::exact(&s, &v(&[2.0, 1.0]), 1);
        let loss = LossSnapshot::new(&s, &f).unwrap();
        // direct arithmetic on the three residuals
        let expect = (0.5f64.sqrt() - 2.5f64.sqrt()).powi(2)
            + (0.5 - 4.25f64.sqrt()).powi(2)
            + (0.5 - 3.25f64.sqrt()).powi(2);
        let got = loss.value(&v(&[0.0, 0.0])).unwrap();
        assert!((got - expect).abs() < 1e-14);
        assert!((got - 4.89960).abs() < 1e-5);
    }

    #[test]
    fn anchor_guard_names_sensor() {
        let s = paper_sensors();
        let f = MeasurementFrame::exact(&s, &v(&[2.0, 1.0]), 1);
        let loss = LossSnapshot::new(&s, &f).unwrap();
        let near = v(&[0.5 + 1e-10, 0.5]);
        assert!(matches!(
            loss.gradient(&near),
            Err(Error::AnchorProximity { sensor: 0, .. })
        ));
        assert!(matches!(
            loss.hessian(&near),
            Err(Error::AnchorProximity { sensor: 0, .. })
        ));
        // the value itself is still defined there
        assert!(loss.value(&near).unwrap().is_finite());
    }

    #[test]
    fn hessian_at_truth_is_gram_and_symmetric() {
        let s = paper_sensors();
        let x = v(&[2.0, 1.0]);
        let f = MeasurementFrame::exact(&s, &x, 1);
        let h = LossSnapshot::new(&s, &f).unwrap().hessian(&x).unwrap();
        let mut gram = Matrix::zeros(2, 2);
        for a in s.positions() {
            let u = &x - a;
            let u = u.scaled(1.0 / u.norm());
            gram.add_outer(2.0, &u, &u);
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[(i, j)] - gram[(i, j)]).abs() < 1e-14);
            }
        }
        assert_eq!(h.max_asymmetry(), 0.0);
        let det = h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)];
        assert!(det > 0.0 && h[(0, 0)] > 0.0);
    }

    #[test]
    fn rejects_bad_snapshot() {
        let s = paper_sensors();
        let f = MeasurementFrame::new(1, vec![1.0, 2.0], 0.0).unwrap();
        assert!(matches!(
            LossSnapshot::new(&s, &f),
            Err(Error::LengthMismatch { .. })
        ));
        let f = MeasurementFrame::exact(&s, &v(&[2.0, 1.0]), 1);
        assert!(LossSnapshot::with_guard(&s, &f, 0.0).is_err());
        let loss = LossSnapshot::new(&s, &f).unwrap();
        assert!(matches!(
            loss.gradient(&v(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
