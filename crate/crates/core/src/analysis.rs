//! Loss-landscape diagnostics.
//!
//! Covers the geometric conditioning constant `Lambda`, the strong-convexity
//! radius `kappa`, sampled curvature bounds `mu`/`L` on a ball, the gradient
//! descent contraction factor `rho`, the tracking-condition checks, two
//! eigenvalue/unit-vector identities used in the convexity argument, and an
//! empirical fit of the estimation-error constants `K1`, `K2`.
//!
//! `K1` and `K2` only exist abstractly, so every report records whether they
//! were set from the empirical regression ([`ConstantsMode::Empirical`]) or
//! zeroed ([`ConstantsMode::Idealized`], the noise-free upper bound on kappa).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{batch_least_squares, OracleConfig, Termination};
use crate::geometry::{measure, MeasurementFrame, NoiseSchedule, SensorArray, Trajectory};
use crate::linalg::{least_squares, symmetric_eigenvalues, symmetric_extremes, Matrix, Vector};
use crate::loss::{LossSnapshot, DEFAULT_ANCHOR_GUARD};
use crate::rng::{point_in_ball, standard_normal, stream, Domain};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantsMode {
    /// `K1`, `K2` fitted by [`estimation_error_scaling`].
    Empirical,
    /// `K1 = K2 = 0`.
    Idealized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexityConfig<T> {
    pub delta: T,
    pub c0: T,
    #[serde(rename = "K1")]
    pub k1: T,
    #[serde(rename = "K2")]
    pub k2: T,
    pub eig_samples: usize,
    pub mode: ConstantsMode,
    /// Root seed for ball sampling.
    #[serde(default)]
    pub seed: u64,
}

impl<T: Scalar> ConvexityConfig<T> {
    /// `delta = 0.5`, `c0 = 3`, `K1 = K2 = 0`, 1000 samples.
    pub fn idealized() -> Self {
        ConvexityConfig {
            delta: T::of(0.5),
            c0: T::of(3.0),
            k1: T::zero(),
            k2: T::zero(),
            eig_samples: 1000,
            mode: ConstantsMode::Idealized,
            seed: 0,
        }
    }

    pub fn empirical(k1: T, k2: T) -> Self {
        ConvexityConfig {
            k1,
            k2,
            mode: ConstantsMode::Empirical,
            ..Self::idealized()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > T::zero()) {
            return Err(Error::param("delta", "must be positive"));
        }
        if !(self.c0 > T::zero()) {
            return Err(Error::param("c0", "must be positive"));
        }
        if !(self.k1 >= T::zero()) || !(self.k2 >= T::zero()) {
            return Err(Error::param("K1/K2", "must be nonnegative"));
        }
        if self.eig_samples == 0 {
            return Err(Error::param("eig_samples", "must be at least 1"));
        }
        Ok(())
    }

    /// Estimation-error bound `K1 sqrt(m) sigma + K2 m sigma^2`.
    pub fn noise_radius(&self, m: usize, sigma: T) -> T {
        let m = T::of(m as f64);
        self.k1 * m.sqrt() * sigma + self.k2 * m * sigma * sigma
    }
}

/// Unit-direction Gram sum `sum_i u_i u_i^T`, `u_i = (x - a_i)/||x - a_i||`.
pub fn direction_gram<T: Scalar>(sensors: &SensorArray<T>, x: &Vector<T>) -> Result<Matrix<T>> {
    if x.dim() != sensors.n() {
        return Err(Error::DimensionMismatch {
            expected: sensors.n(),
            got: x.dim(),
        });
    }
    let n = sensors.n();
    let mut gram = Matrix::zeros(n, n);
    for (i, a) in sensors.positions().iter().enumerate() {
        let diff = x - a;
        let d = diff.norm();
        if !(d > T::of(DEFAULT_ANCHOR_GUARD)) {
            return Err(Error::AnchorProximity {
                sensor: i,
                distance: d.to_f64_lossy(),
                guard: DEFAULT_ANCHOR_GUARD,
            });
        }
        let u = diff.scaled(T::one() / d);
        gram.add_outer(T::one(), &u, &u);
    }
    Ok(gram)
}

/// `Lambda = lambda_min(sum_i u_i u_i^T)`.
pub fn direction_gram_min_eig<T: Scalar>(sensors: &SensorArray<T>, x: &Vector<T>) -> Result<T> {
    Ok(symmetric_extremes(&direction_gram(sensors, x)?).0)
}

/// Strong-convexity radius
/// `kappa = delta Lambda / (10 m) - (K1 sqrt(m) sigma + K2 m sigma^2) - 4 c0 sigma / 5`.
/// Nonpositive values mean the condition fails.
pub fn kappa<T: Scalar>(cfg: &ConvexityConfig<T>, m: usize, lambda: T, sigma: T) -> T {
    let mf = T::of(m as f64);
    cfg.delta / (T::of(10.0) * mf) * lambda
        - cfg.noise_radius(m, sigma)
        - T::of(0.8) * cfg.c0 * sigma
}

/// Hessian eigenvalue extremes over a sampled ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallProbe<T> {
    /// Smallest `lambda_min` seen; the strong-convexity estimate `mu_hat`.
    pub min_eig: T,
    /// Largest `lambda_max` seen; the gradient-Lipschitz estimate `L_hat`.
    pub max_eig: T,
    pub points: usize,
}

impl<T: Scalar> BallProbe<T> {
    pub fn all_positive(&self) -> bool {
        self.min_eig > T::zero()
    }
}

/// Evaluates the Hessian at the center, the `2n` axis points on the sphere,
/// and `samples` uniform points inside `B(center, radius)`. With `radius = 0`
/// only the center is used.
pub fn probe_ball<T: Scalar, R: Rng + ?Sized>(
    s: &LossSnapshot<'_, T>,
    center: &Vector<T>,
    radius: T,
    samples: usize,
    rng: &mut R,
) -> Result<BallProbe<T>> {
    if !(radius >= T::zero()) || !radius.is_finite() {
        return Err(Error::param("radius", "must be finite and nonnegative"));
    }
    if center.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: center.dim(),
        });
    }
    for (i, a) in s.sensors().positions().iter().enumerate() {
        let d = center.distance(a);
        if d <= radius + s.anchor_guard() {
            return Err(Error::AnchorInBall {
                sensor: i,
                distance: d.to_f64_lossy(),
                radius: radius.to_f64_lossy(),
            });
        }
    }

    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut points = 0usize;
    let mut visit = |x: &Vector<T>| -> Result<()> {
        let (a, b) = symmetric_extremes(&s.hessian(x)?);
        lo = lo.min(a);
        hi = hi.max(b);
        points += 1;
        Ok(())
    };

    visit(center)?;
    if radius > T::zero() {
        let n = center.dim();
        for k in 0..n {
            let e = Vector::basis(n, k);
            for sign in [T::one(), -T::one()] {
                let mut p = center.clone();
                p.axpy(sign * radius, &e);
                visit(&p)?;
            }
        }
        for _ in 0..samples {
            visit(&point_in_ball(center, radius, rng))?;
        }
    }
    Ok(BallProbe {
        min_eig: lo,
        max_eig: hi,
        points,
    })
}

/// Smallest sampled Hessian eigenvalue on the ball and whether it is positive.
pub fn verify_local_strong_convexity<T: Scalar, R: Rng + ?Sized>(
    s: &LossSnapshot<'_, T>,
    center: &Vector<T>,
    radius: T,
    samples: usize,
    rng: &mut R,
) -> Result<(T, bool)> {
    let probe = probe_ball(s, center, radius, samples, rng)?;
    Ok((probe.min_eig, probe.all_positive()))
}

/// `(mu_hat, L_hat)`: min of `lambda_min` and max of `lambda_max` over the
/// same sample set as [`verify_local_strong_convexity`].
pub fn estimate_strong_convexity_constants<T: Scalar, R: Rng + ?Sized>(
    s: &LossSnapshot<'_, T>,
    center: &Vector<T>,
    radius: T,
    samples: usize,
    rng: &mut R,
) -> Result<(T, T)> {
    let probe = probe_ball(s, center, radius, samples, rng)?;
    Ok((probe.min_eig, probe.max_eig))
}

/// Per-step contraction of gradient descent on a `mu`-strongly convex,
/// `L`-smooth function: `rho = (1 - 2 eta mu L / (mu + L))^{1/2}`.
pub fn contraction_factor<T: Scalar>(eta: T, mu: T, l: T) -> Result<T> {
    if !(mu > T::zero()) || !(l >= mu) || !l.is_finite() {
        return Err(Error::param("mu/L", "need 0 < mu <= L"));
    }
    let max = T::of(2.0) / (mu + l);
    // the boundary value 2/(mu+L) is admissible even after rounding
    if !(eta > T::zero()) || eta > max * (T::one() + T::of(4.0) * T::epsilon()) {
        return Err(Error::StepSizeOutOfRange {
            eta: eta.to_f64_lossy(),
            max: max.to_f64_lossy(),
        });
    }
    let q = T::one() - T::of(2.0) * eta * mu * l / (mu + l);
    Ok(q.max(T::zero()).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityReport<T> {
    pub mode: ConstantsMode,
    pub delta: T,
    /// `max_t sigma_t`
    pub sigma: T,
    /// `max_t ||x_{t+1}* - x_t*||`
    pub v: T,
    pub eta: T,
    /// `K1 sqrt(m) sigma + K2 m sigma^2`
    pub noise_radius: T,
    pub min_distance: T,
    #[serde(rename = "Lambda")]
    pub lambda: T,
    pub kappa: T,
    pub mu_hat: Option<T>,
    #[serde(rename = "L_hat")]
    pub l_hat: Option<T>,
    pub rho: Option<T>,
    /// Every sensor farther than `noise_radius + delta` at every step.
    pub dist_condition_ok: bool,
    pub kappa_positive: bool,
    /// `kappa >= (2 noise_radius + v) / (1 - rho)`
    pub radius_condition_ok: bool,
    /// `||x0 - x_1*|| <= noise_radius`
    pub init_condition_ok: bool,
}

impl<T: Scalar> ConvexityReport<T> {
    pub fn all_ok(&self) -> bool {
        self.dist_condition_ok
            && self.kappa_positive
            && self.radius_condition_ok
            && self.init_condition_ok
    }
}

/// Evaluates the conditions under which gradient tracking provably stays in
/// the strong-convexity region at every step. Never fails; problems show up
/// as false flags or missing estimates.
///
/// Uniform constants are taken as min/max over the trajectory points.
/// `mu_hat`, `L_hat` are sampled on `B(x_t*, kappa)` of the noise-free loss.
pub fn check_tracking_conditions<T: Scalar>(
    cfg: &ConvexityConfig<T>,
    sensors: &SensorArray<T>,
    trajectory: &Trajectory<T>,
    noise: &NoiseSchedule<T>,
    eta: T,
    x0: &Vector<T>,
) -> ConvexityReport<T> {
    let m = sensors.m();
    let horizon = trajectory.len();
    let sigma = noise.sigmas(horizon).into_iter().fold(T::zero(), T::max);
    let v = trajectory.variations().into_iter().fold(T::zero(), T::max);
    let noise_radius = cfg.noise_radius(m, sigma);

    let min_distance = trajectory
        .positions()
        .iter()
        .flat_map(|x| sensors.distances(x))
        .fold(T::infinity(), T::min);
    let dist_condition_ok = min_distance > noise_radius + cfg.delta;

    let lambda = trajectory
        .positions()
        .iter()
        .map(|x| direction_gram_min_eig(sensors, x).unwrap_or(T::zero()))
        .fold(T::infinity(), T::min);
    let kappa = kappa(cfg, m, lambda, sigma);
    let kappa_positive = kappa > T::zero();

    let per_point = cfg.eig_samples.div_ceil(horizon).max(1);
    let radius = kappa.max(T::zero());
    let mut bounds: Option<(T, T)> = Some((T::infinity(), T::neg_infinity()));
    for (k, x) in trajectory.positions().iter().enumerate() {
        let frame = MeasurementFrame::exact(sensors, x, k + 1);
        let probe = LossSnapshot::new(sensors, &frame).and_then(|s| {
            let mut rng = stream(cfg.seed, Domain::BallSampling, 0, k as u64);
            probe_ball(&s, x, radius, per_point, &mut rng)
        });
        bounds = match (bounds, probe) {
            (Some((lo, hi)), Ok(p)) => Some((lo.min(p.min_eig), hi.max(p.max_eig))),
            _ => None,
        };
    }
    let (mu_hat, l_hat) = match bounds {
        Some((lo, hi)) => (Some(lo), Some(hi)),
        None => (None, None),
    };
    let rho = match (mu_hat, l_hat) {
        (Some(mu), Some(l)) => contraction_factor(eta, mu, l).ok(),
        _ => None,
    };
    let radius_condition_ok = match rho {
        Some(rho) if rho < T::one() => kappa >= (T::of(2.0) * noise_radius + v) / (T::one() - rho),
        _ => false,
    };
    let init_condition_ok =
        x0.dim() == sensors.n() && x0.distance(trajectory.at(1)) <= noise_radius;

    ConvexityReport {
        mode: cfg.mode,
        delta: cfg.delta,
        sigma,
        v,
        eta,
        noise_radius,
        min_distance,
        lambda,
        kappa,
        mu_hat,
        l_hat,
        rho,
        dist_condition_ok,
        kappa_positive,
        radius_condition_ok,
        init_condition_ok,
    }
}

/// Closed form `lambda_min(u u^T - v v^T) = (||u||^2 - ||v||^2 - ||u - v|| ||u + v||) / 2`
/// for linearly independent `u`, `v`.
pub fn rank_one_diff_min_eig<T: Scalar>(u: &Vector<T>, v: &Vector<T>) -> Result<T> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: v.dim(),
        });
    }
    let (nu, nv) = (u.norm(), v.norm());
    if nu == T::zero() || nv == T::zero() {
        return Err(Error::LinearlyDependent { sin: 0.0 });
    }
    let uh = u.scaled(T::one() / nu);
    let vh = v.scaled(T::one() / nv);
    let mut perp = uh.clone();
    perp.axpy(-uh.dot(&vh), &vh);
    let sin = perp.norm();
    if !(sin > T::of(1e-12)) {
        return Err(Error::LinearlyDependent {
            sin: sin.to_f64_lossy(),
        });
    }
    let diff = (u - v).norm();
    let sum = (u + v).norm();
    Ok((nu * nu - nv * nv - diff * sum) / T::of(2.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnitDiffBound<T> {
    /// `||x/||x|| - y/||y|| ||`
    pub lhs: T,
    /// `||x - y|| / min(||x||, ||y||)`
    pub rhs: T,
    pub holds: bool,
}

/// Distance between normalized vectors is at most the raw distance over the
/// smaller norm. Both sides are scale-free and carry absolute rounding error
/// of a few ulps (unit vectors are subtracted), so `holds` allows that much.
pub fn unit_diff_bound<T: Scalar>(x: &Vector<T>, y: &Vector<T>) -> Result<UnitDiffBound<T>> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let (nx, ny) = (x.norm(), y.norm());
    if nx == T::zero() || ny == T::zero() {
        return Err(Error::ZeroVector);
    }
    let lhs = (&x.scaled(T::one() / nx) - &y.scaled(T::one() / ny)).norm();
    let rhs = (x - y).norm() / nx.min(ny);
    let slack = T::of(16.0) * T::epsilon();
    let holds = lhs <= rhs * (T::one() + slack) + slack;
    Ok(UnitDiffBound { lhs, rhs, holds })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaSuiteReport {
    pub eig_pairs: usize,
    /// Largest `|closed form - Jacobi|` over all pairs.
    pub eig_max_abs_error: f64,
    pub unit_pairs: usize,
    pub unit_violations: usize,
    pub equal_norm_pairs: usize,
    /// Largest `|lhs - rhs|` over equal-norm pairs.
    pub equal_norm_max_gap: f64,
    /// Pairs with clearly different norms where the bound was tight to 1e-12.
    pub unequal_norm_tight: usize,
}

impl LemmaSuiteReport {
    pub fn eig_ok(&self, tol: f64) -> bool {
        self.eig_max_abs_error <= tol
    }

    pub fn unit_ok(&self) -> bool {
        self.unit_violations == 0
            && self.equal_norm_max_gap <= 1e-12
            && self.unequal_norm_tight == 0
    }
}

/// Randomized check of [`rank_one_diff_min_eig`] against a dense eigensolve
/// (dimensions 2..=5) and of [`unit_diff_bound`] on general and equal-norm pairs.
pub fn lemma_suite(eig_pairs: usize, unit_pairs: usize, seed: u64) -> LemmaSuiteReport {
    let mut rng = stream(seed, Domain::Lemmas, 0, 0);
    let gaussian = |n: usize, rng: &mut crate::rng::StreamRng| -> Vector<f64> {
        Vector::new((0..n).map(|_| standard_normal::<f64, _>(rng)).collect())
    };

    let mut eig_max_abs_error = 0.0f64;
    let mut done = 0;
    while done < eig_pairs {
        let n = rng.random_range(2..=5usize);
        let u = gaussian(n, &mut rng);
        let v = gaussian(n, &mut rng);
        let Ok(closed) = rank_one_diff_min_eig(&u, &v) else {
            continue;
        };
        let mut m = Matrix::zeros(n, n);
        m.add_outer(1.0, &u, &u);
        m.add_outer(-1.0, &v, &v);
        let dense = symmetric_eigenvalues(&m)[0];
        eig_max_abs_error = eig_max_abs_error.max((closed - dense).abs());
        done += 1;
    }

    let mut unit_violations = 0;
    let mut equal_norm_max_gap = 0.0f64;
    let mut unequal_norm_tight = 0;
    let equal_norm_pairs = unit_pairs / 10;
    for k in 0..unit_pairs {
        let n = rng.random_range(2..=5usize);
        let x = gaussian(n, &mut rng);
        let mut y = gaussian(n, &mut rng);
        if x.norm() == 0.0 || y.norm() == 0.0 {
            continue;
        }
        let equal = k < equal_norm_pairs;
        if equal {
            y = y.scaled(x.norm() / y.norm());
        }
        let Ok(b) = unit_diff_bound(&x, &y) else {
            continue;
        };
        if !b.holds {
            unit_violations += 1;
        }
        if equal {
            equal_norm_max_gap = equal_norm_max_gap.max((b.rhs - b.lhs).abs());
        } else {
            let rel = (x.norm() - y.norm()).abs() / x.norm().max(y.norm());
            if rel > 1e-3 && b.rhs - b.lhs <= 1e-12 {
                unequal_norm_tight += 1;
            }
        }
    }

    LemmaSuiteReport {
        eig_pairs,
        eig_max_abs_error,
        unit_pairs,
        unit_violations,
        equal_norm_pairs,
        equal_norm_max_gap,
        unequal_norm_tight,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint<T> {
    pub sigma: T,
    /// Mean of `||x_hat - x*||` over successful samples.
    pub mean_error: T,
    pub successes: usize,
    /// Samples where the oracle hit a sensor; excluded from the mean.
    pub failures: usize,
    /// Samples that stopped at the iteration cap; kept in the mean.
    pub unconverged: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit<T> {
    #[serde(rename = "K1_hat")]
    pub k1: T,
    #[serde(rename = "K2_hat")]
    pub k2: T,
    pub r_squared: T,
    pub residuals: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport<T> {
    pub points: Vec<ScalingPoint<T>>,
    /// `None` when the grid has fewer than two positive levels.
    pub fit: Option<ScalingFit<T>>,
}

/// Monte Carlo estimate of the least-squares estimation error as a function
/// of the noise level, with a fit of `mean_error ~ K1 sqrt(m) sigma + K2 m sigma^2`.
///
/// Sample `k` draws the same standard-normal noise at every `sigma`, so the
/// levels are compared on common random numbers.
pub fn estimation_error_scaling<T: Scalar>(
    sensors: &SensorArray<T>,
    x_true: &Vector<T>,
    sigma_grid: &[T],
    runs_per_sigma: usize,
    oracle: &OracleConfig<T>,
    seed: u64,
) -> Result<ScalingReport<T>> {
    oracle.validate()?;
    if runs_per_sigma == 0 {
        return Err(Error::param("runs_per_sigma", "must be at least 1"));
    }
    if sigma_grid.is_empty() || sigma_grid.iter().any(|s| !(*s >= T::zero())) {
        return Err(Error::param("sigma_grid", "levels must be nonnegative"));
    }
    if sigma_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param(
            "sigma_grid",
            "levels must be strictly ascending",
        ));
    }
    if x_true.dim() != sensors.n() {
        return Err(Error::DimensionMismatch {
            expected: sensors.n(),
            got: x_true.dim(),
        });
    }

    let mut points = Vec::with_capacity(sigma_grid.len());
    for &sigma in sigma_grid {
        let samples: Vec<Result<Option<(T, bool)>>> = (0..runs_per_sigma)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(seed, Domain::ErrorScaling, k as u64, 0);
                let frame = measure(sensors, x_true, 1, sigma, &mut rng)?;
                let loss = LossSnapshot::new(sensors, &frame)?;
                let out = match batch_least_squares(&loss, x_true, oracle) {
                    Ok(out) => out,
                    Err(Error::AnchorProximity { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                };
                Ok(match out.termination {
                    Termination::AnchorProximity { .. } => None,
                    t => Some((out.point.distance(x_true), t == Termination::Converged)),
                })
            })
            .collect();
        let mut sum = T::zero();
        let (mut successes, mut failures, mut unconverged) = (0, 0, 0);
        for s in samples {
            match s? {
                Some((err, converged)) => {
                    sum += err;
                    successes += 1;
                    if !converged {
                        unconverged += 1;
                    }
                }
                None => failures += 1,
            }
        }
        let mean_error = if successes > 0 {
            sum / T::of(successes as f64)
        } else {
            T::nan()
        };
        points.push(ScalingPoint {
            sigma,
            mean_error,
            successes,
            failures,
            unconverged,
        });
    }

    let fit = fit_error_model(sensors.m(), &points);
    Ok(ScalingReport { points, fit })
}

fn fit_error_model<T: Scalar>(m: usize, points: &[ScalingPoint<T>]) -> Option<ScalingFit<T>> {
    let usable: Vec<&ScalingPoint<T>> = points
        .iter()
        .filter(|p| p.successes > 0 && p.mean_error.is_finite())
        .collect();
    if usable.iter().filter(|p| p.sigma > T::zero()).count() < 2 {
        return None;
    }
    let mf = T::of(m as f64);
    let rows: Vec<Vector<T>> = usable
        .iter()
        .map(|p| Vector::new(vec![mf.sqrt() * p.sigma, mf * p.sigma * p.sigma]))
        .collect();
    let y = Vector::new(usable.iter().map(|p| p.mean_error).collect());
    let coef = least_squares(&Matrix::from_rows(&rows).ok()?, &y).ok()?;
    let residuals: Vec<T> = rows
        .iter()
        .zip(y.iter())
        .map(|(r, &yi)| yi - r.dot(&coef))
        .collect();
    let mean = y.iter().copied().sum::<T>() / T::of(y.dim() as f64);
    let ss_tot: T = y.iter().map(|&yi| (yi - mean) * (yi - mean)).sum();
    let ss_res: T = residuals.iter().map(|&e| e * e).sum();
    let r_squared = if ss_tot > T::zero() {
        T::one() - ss_res / ss_tot
    } else {
        T::nan()
    };
    Some(ScalingFit {
        k1: coef[0],
        k2: coef[1],
        r_squared,
        residuals,
    })
}
