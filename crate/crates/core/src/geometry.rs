//! Sensor layouts, target trajectories and the noisy range model.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{singular_values, Matrix, Vector};
use crate::rng::{standard_normal, unit_direction};
use crate::scalar::Scalar;

/// Relative singular-value threshold below which sensor differences are
/// treated as rank deficient.
pub const SPAN_TOLERANCE: f64 = 1e-10;

/// Fixed sensor (anchor) positions whose differences span the ambient space.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorArray<T> {
    positions: Vec<Vector<T>>,
    dim: usize,
}

impl<T: Scalar> SensorArray<T> {
    /// Validates the layout: at least `n + 1` sensors, and the differences
    /// `a_i - a_1` have full rank `n`.
    pub fn new(positions: Vec<Vector<T>>) -> Result<Self> {
        let first = positions
            .first()
            .ok_or_else(|| Error::param("sensors", "empty sensor list"))?;
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::param("sensors", "zero-dimensional points"));
        }
        for p in &positions {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            if !p.is_finite() {
                return Err(Error::param("sensors", "non-finite coordinate"));
            }
        }
        let count = positions.len();
        if count < dim + 1 {
            return Err(Error::TooFewSensors {
                count,
                dim,
                required: dim + 1,
            });
        }
        let diffs: Vec<Vector<T>> = positions[1..].iter().map(|a| a - first).collect();
        let sv = singular_values(&Matrix::from_rows(&diffs)?);
        let largest = sv[0];
        let smallest = sv[dim - 1];
        let ratio = if largest > T::zero() {
            (smallest / largest).to_f64_lossy()
        } else {
            0.0
        };
        if !(ratio > SPAN_TOLERANCE) {
            return Err(Error::RankDeficient { dim, ratio });
        }
        Ok(SensorArray { positions, dim })
    }

    pub fn from_coords(coords: &[Vec<T>]) -> Result<Self> {
        Self::new(coords.iter().map(|c| Vector::from_slice(c)).collect())
    }

    /// Number of sensors `m`.
    #[inline]
    pub fn m(&self) -> usize {
        self.positions.len()
    }

    /// Ambient dimension `n`.
    #[inline]
    pub fn n(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn positions(&self) -> &[Vector<T>] {
        &self.positions
    }

    #[inline]
    pub fn position(&self, i: usize) -> &Vector<T> {
        &self.positions[i]
    }

    /// Exact distances from `x` to every sensor.
    pub fn distances(&self, x: &Vector<T>) -> Vec<T> {
        self.positions.iter().map(|a| x.distance(a)).collect()
    }

    /// Same layout shifted by `offset`.
    pub fn translated(&self, offset: &Vector<T>) -> Self {
        SensorArray {
            positions: self.positions.iter().map(|a| a + offset).collect(),
            dim: self.dim,
        }
    }

    pub(crate) fn check_dim(&self, x: &Vector<T>) -> Result<()> {
        if x.dim() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            })
        }
    }
}

/// True target positions `x_1*, ..., x_T*`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    positions: Vec<Vector<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(positions: Vec<Vector<T>>) -> Result<Self> {
        let first = positions
            .first()
            .ok_or_else(|| Error::param("trajectory", "horizon must be at least 1"))?;
        for p in &positions {
            if p.dim() != first.dim() {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    got: p.dim(),
                });
            }
            if !p.is_finite() {
                return Err(Error::param("trajectory", "non-finite coordinate"));
            }
        }
        Ok(Trajectory { positions })
    }

    /// Random walk with shrinking steps:
    /// `x_{t+1} = x_t + step_scale / sqrt(2(t+1)) * u_t`, `u_t` uniform on the unit sphere.
    pub fn random_walk<R: Rng + ?Sized>(
        x1: &Vector<T>,
        horizon: usize,
        step_scale: T,
        rng: &mut R,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::param("T", "horizon must be at least 1"));
        }
        if !(step_scale >= T::zero()) {
            return Err(Error::param("step_scale", "must be nonnegative"));
        }
        let mut positions = Vec::with_capacity(horizon);
        positions.push(x1.clone());
        for t in 1..horizon {
            let u = unit_direction::<T, R>(x1.dim(), rng);
            let mut next = positions[t - 1].clone();
            next.axpy(random_walk_increment(step_scale, t), &u);
            positions.push(next);
        }
        Self::new(positions)
    }

    /// Target parked at `x` for `horizon` steps.
    pub fn stationary(x: &Vector<T>, horizon: usize) -> Result<Self> {
        Self::new(vec![x.clone(); horizon])
    }

    /// Horizon `T`.
    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn positions(&self) -> &[Vector<T>] {
        &self.positions
    }

    /// Position at 1-based time `t`.
    #[inline]
    pub fn at(&self, t: usize) -> &Vector<T> {
        &self.positions[t - 1]
    }

    /// Step lengths `v_t = ||x_{t+1}* - x_t*||`, `t = 1..T-1`.
    pub fn variations(&self) -> Vec<T> {
        self.positions
            .windows(2)
            .map(|w| w[1].distance(&w[0]))
            .collect()
    }
}

/// Step length of the random walk between times `t` and `t + 1` (1-based `t`).
#[inline]
pub fn random_walk_increment<T: Scalar>(step_scale: T, t: usize) -> T {
    step_scale / (T::of(2.0) * T::of((t + 1) as f64)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseKind<T> {
    /// `sigma_t = sigma`
    Constant { sigma: T },
    /// `sigma_t = c / sqrt(t)`
    InverseSqrt { c: T },
    /// `sigma_t = c / sqrt(2t)`
    ScaledInverseSqrt { c: T },
}

/// Noise standard deviation per time step, plus the high-probability norm
/// constant `c0` (`||w|| <= c0 sqrt(m) sigma`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSchedule<T> {
    pub kind: NoiseKind<T>,
    pub c0: T,
}

fn default_c0<T: Scalar>() -> T {
    T::of(3.0)
}

impl<T: Scalar> NoiseSchedule<T> {
    pub fn new(kind: NoiseKind<T>, c0: T) -> Result<Self> {
        let s = NoiseSchedule { kind, c0 };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(sigma: T) -> Self {
        NoiseSchedule {
            kind: NoiseKind::Constant { sigma },
            c0: default_c0(),
        }
    }

    pub fn inverse_sqrt(c: T) -> Self {
        NoiseSchedule {
            kind: NoiseKind::InverseSqrt { c },
            c0: default_c0(),
        }
    }

    pub fn scaled_inverse_sqrt(c: T) -> Self {
        NoiseSchedule {
            kind: NoiseKind::ScaledInverseSqrt { c },
            c0: default_c0(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let level = match self.kind {
            NoiseKind::Constant { sigma } => sigma,
            NoiseKind::InverseSqrt { c } | NoiseKind::ScaledInverseSqrt { c } => c,
        };
        if !(level >= T::zero()) || !level.is_finite() {
            return Err(Error::param(
                "noise",
                "level must be finite and nonnegative",
            ));
        }
        if !(self.c0 > T::zero()) {
            return Err(Error::param("c0", "must be positive"));
        }
        Ok(())
    }

    /// `sigma_t` at 1-based time `t`.
    pub fn sigma(&self, t: usize) -> T {
        debug_assert!(t >= 1);
        let t = T::of(t as f64);
        match self.kind {
            NoiseKind::Constant { sigma } => sigma,
            NoiseKind::InverseSqrt { c } => c / t.sqrt(),
            NoiseKind::ScaledInverseSqrt { c } => c / (T::of(2.0) * t).sqrt(),
        }
    }

    /// `sigma_1, ..., sigma_T`.
    pub fn sigmas(&self, horizon: usize) -> Vec<T> {
        (1..=horizon).map(|t| self.sigma(t)).collect()
    }
}

/// One time step of noisy ranges `r_i^t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementFrame<T> {
    pub t: usize,
    pub ranges: Vec<T>,
    pub sigma_t: T,
}

impl<T: Scalar> MeasurementFrame<T> {
    pub fn new(t: usize, ranges: Vec<T>, sigma_t: T) -> Result<Self> {
        if ranges.iter().any(|r| !r.is_finite()) {
            return Err(Error::param("ranges", "non-finite range"));
        }
        if !(sigma_t >= T::zero()) {
            return Err(Error::param("sigma_t", "must be nonnegative"));
        }
        Ok(MeasurementFrame { t, ranges, sigma_t })
    }

    /// Noise-free frame: ranges equal the exact distances to `x_true`.
    pub fn exact(sensors: &SensorArray<T>, x_true: &Vector<T>, t: usize) -> Self {
        MeasurementFrame {
            t,
            ranges: sensors.distances(x_true),
            sigma_t: T::zero(),
        }
    }

    /// Order-sensitive FNV-1a digest of the frame contents.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(self.t as u64);
        eat(self.sigma_t.to_f64_lossy().to_bits());
        for r in &self.ranges {
            eat(r.to_f64_lossy().to_bits());
        }
        h
    }

    /// `max_i |r_i - d_i| / d_i`, the size of the noise relative to the true range.
    pub fn max_noise_ratio(&self, sensors: &SensorArray<T>, x_true: &Vector<T>) -> T {
        sensors
            .positions()
            .iter()
            .zip(&self.ranges)
            .map(|(a, &r)| {
                let d = x_true.distance(a);
                (r - d).abs() / d
            })
            .fold(T::zero(), T::max)
    }
}

/// Draws `r_i = ||x_true - a_i|| + w_i`, `w_i ~ N(0, sigma_t^2)` i.i.d.
pub fn measure<T: Scalar, R: Rng + ?Sized>(
    sensors: &SensorArray<T>,
    x_true: &Vector<T>,
    t: usize,
    sigma_t: T,
    rng: &mut R,
) -> Result<MeasurementFrame<T>> {
    sensors.check_dim(x_true)?;
    if !(sigma_t >= T::zero()) {
        return Err(Error::param("sigma_t", "must be nonnegative"));
    }
    let ranges = sensors
        .positions()
        .iter()
        .map(|a| {
            let w: T = standard_normal::<T, R>(rng);
            x_true.distance(a) + sigma_t * w
        })
        .collect();
    MeasurementFrame::new(t, ranges, sigma_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    fn paper_sensors() -> SensorArray<f64> {
        SensorArray::from_coords(&[vec![0.5, 0.5], vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap()
    }

    #[test]
    fn accepts_reference_layout() {
        let s = paper_sensors();
        assert_eq!((s.m(), s.n()), (3, 2));
    }

    #[test]
    fn rejects_collinear_and_too_few() {
        let collinear =
            SensorArray::<f64>::from_coords(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]);
        assert!(matches!(
            collinear,
            Err(Error::RankDeficient { dim: 2, .. })
        ));
        let few = SensorArray::<f64>::from_coords(&[vec![0.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(
            few,
            Err(Error::TooFewSensors {
                count: 2,
                required: 3,
                ..
            })
        ));
        let ragged = SensorArray::<f64>::from_coords(&[vec![0.0, 0.0], vec![1.0], vec![2.0, 0.0]]);
        assert!(matches!(ragged, Err(Error::DimensionMismatch { .. })));
        assert!(SensorArray::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn near_threshold_layout_is_accepted() {
        // smallest/largest singular value around 2e-10, just above the cutoff
        let s = SensorArray::<f64>::from_coords(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 1e-9]]);
        assert!(s.is_ok());
        let s =
            SensorArray::<f64>::from_coords(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 1e-11]]);
        assert!(matches!(s, Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn zero_step_walk_is_constant() {
        let x1 = Vector::from_slice(&[2.0, 1.0]);
        let mut rng = stream(0, Domain::Trajectory, 0, 0);
        let traj = Trajectory::random_walk(&x1, 50, 0.0, &mut rng).unwrap();
        assert!(traj.positions().iter().all(|p| *p == x1));
    }

    #[test]
    fn walk_increment_law() {
        let x1 = Vector::from_slice(&[2.0, 1.0]);
        let mut rng = stream(11, Domain::Trajectory, 0, 0);
        let traj = Trajectory::random_walk(&x1, 500, 0.005, &mut rng).unwrap();
        for (k, v) in traj.variations().into_iter().enumerate() {
            let t = k + 1;
            let scaled = v * (2.0 * (t + 1) as f64).sqrt();
            // increments are recovered by differencing O(1) positions
            assert!(((scaled - 0.005) / 0.005).abs() < 1e-10, "t={t}: {scaled}");
        }
    }

    #[test]
    fn walk_is_deterministic_per_seed() {
        let x1 = Vector::from_slice(&[2.0, 1.0]);
        let a = Trajectory::random_walk(&x1, 100, 0.1, &mut stream(5, Domain::Trajectory, 2, 0))
            .unwrap();
        let b = Trajectory::random_walk(&x1, 100, 0.1, &mut stream(5, Domain::Trajectory, 2, 0))
            .unwrap();
        let c = Trajectory::random_walk(&x1, 100, 0.1, &mut stream(5, Domain::Trajectory, 3, 0))
            .unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_ranges_are_distances() {
        let s = paper_sensors();
        let x = Vector::from_slice(&[2.0, 1.0]);
        let f = measure(&s, &x, 1, 0.0, &mut stream(0, Domain::Measurement, 0, 1)).unwrap();
        let expect = [2.5f64.sqrt(), 4.25f64.sqrt(), 3.25f64.sqrt()];
        for (r, e) in f.ranges.iter().zip(expect) {
            assert!((r - e).abs() < 1e-15);
        }
        assert!((f.ranges[0] - 1.58114).abs() < 1e-5);
        assert!((f.ranges[1] - 2.06155).abs() < 1e-5);
        assert!((f.ranges[2] - 1.80278).abs() < 1e-5);
        assert_eq!(f, MeasurementFrame::exact(&s, &x, 1));
    }

    #[test]
    fn noise_has_zero_mean() {
        let s = paper_sensors();
        let x = Vector::from_slice(&[2.0, 1.0]);
        let d = s.distances(&x);
        let mut rng = stream(42, Domain::Measurement, 0, 0);
        let draws = 100_000;
        let mut acc = 0.0;
        for t in 0..draws {
            let f = measure(&s, &x, t + 1, 0.01, &mut rng).unwrap();
            acc += f.ranges[t % 3] - d[t % 3];
        }
        assert!((acc / draws as f64).abs() < 3e-4);
    }

    #[test]
    fn measurement_reproducible() {
        let s = paper_sensors();
        let x = Vector::from_slice(&[2.0, 1.0]);
        let a = measure(&s, &x, 3, 0.01, &mut stream(9, Domain::Measurement, 4, 3)).unwrap();
        let b = measure(&s, &x, 3, 0.01, &mut stream(9, Domain::Measurement, 4, 3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.checksum(), b.checksum());
    }

    #[test]
    fn schedules() {
        let s = NoiseSchedule::inverse_sqrt(0.01f64);
        assert!((s.sigma(4) - 0.005).abs() < 1e-18);
        let s = NoiseSchedule::scaled_inverse_sqrt(0.008f64);
        assert!((s.sigma(2) - 0.004).abs() < 1e-18);
        assert_eq!(NoiseSchedule::constant(1e-4).sigmas(3), vec![1e-4; 3]);
        assert!(NoiseSchedule::new(NoiseKind::Constant { sigma: -1.0 }, 3.0).is_err());
        assert!(NoiseSchedule::new(NoiseKind::Constant { sigma: 1.0 }, 0.0).is_err());
    }
}
