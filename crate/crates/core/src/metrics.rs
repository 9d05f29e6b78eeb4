//! Tracking-performance metrics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::scalar::Scalar;

/// Cumulative target tracking error `sum_t ||x_t - x_t*||` and its running sums.
pub fn ctte<T: Scalar>(estimates: &[Vector<T>], truth: &[Vector<T>]) -> Result<(T, Vec<T>)> {
    let errors = per_step_error(estimates, truth)?;
    let cumulative = cumulative_sum(&errors);
    let total = cumulative.last().copied().unwrap_or(T::zero());
    Ok((total, cumulative))
}

/// `||x_t - y_t||` for each step.
pub fn per_step_error<T: Scalar>(a: &[Vector<T>], b: &[Vector<T>]) -> Result<Vec<T>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x.distance(y)).collect())
}

pub fn cumulative_sum<T: Scalar>(series: &[T]) -> Vec<T> {
    series
        .iter()
        .scan(T::zero(), |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// `sum_t ||p_{t+1} - p_t||`; zero for fewer than two points.
pub fn path_length<T: Scalar>(points: &[Vector<T>]) -> T {
    points.windows(2).map(|w| w[1].distance(&w[0])).sum()
}

/// `(N1, N2) = (sum sigma_t, sum sigma_t^2)`.
pub fn noise_cumulants<T: Scalar>(sigmas: &[T]) -> Result<(T, T)> {
    if sigmas.iter().any(|s| !(*s >= T::zero())) {
        return Err(Error::param("sigmas", "must be nonnegative"));
    }
    let n1: T = sigmas.iter().copied().sum();
    let n2: T = sigmas.iter().map(|&s| s * s).sum();
    debug_assert!(
        n1 <= (T::of(sigmas.len() as f64) * n2).sqrt() * (T::one() + T::of(1e-12))
            + T::min_positive_value(),
        "Cauchy-Schwarz violated"
    );
    Ok((n1, n2))
}

/// Average increment of `cumulative` over consecutive windows of `window`
/// points (adjacent windows share an endpoint). Windows are aligned so the
/// last one ends at the final sample; a leading remainder is dropped.
pub fn growth_profile<T: Scalar>(cumulative: &[T], window: usize) -> Result<Vec<T>> {
    if window < 2 || window > cumulative.len() {
        return Err(Error::InvalidWindow {
            window,
            len: cumulative.len(),
        });
    }
    let span = window - 1;
    let mut slopes = Vec::new();
    let mut end = cumulative.len() - 1;
    while end >= span {
        let start = end - span;
        slopes.push((cumulative[end] - cumulative[start]) / T::of(span as f64));
        end = start;
    }
    slopes.reverse();
    Ok(slopes)
}

/// One tracker's performance over one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetrics<T> {
    /// `||x_t - x_t*||`
    pub per_step_error: Vec<T>,
    pub ctte: T,
    pub ctte_series: Vec<T>,
    /// `||x_t - x_hat_t||`, when the per-step oracle ran.
    pub oracle_gap: Option<Vec<T>>,
    /// `V(T)`: path length of the true trajectory.
    pub path_length_v: T,
    /// `V'(T)`: path length of the per-step minimizers, when available.
    pub optimal_path_length: Option<T>,
    #[serde(rename = "N1")]
    pub n1: T,
    #[serde(rename = "N2")]
    pub n2: T,
    /// Debug column: `sum_t f_t(x_t) - f_t(x_hat_t)`.
    pub dynamic_regret: Option<T>,
    pub wall_time_per_step: f64,
}

impl<T: Scalar> RunMetrics<T> {
    pub fn compute(
        estimates: &[Vector<T>],
        truth: &[Vector<T>],
        sigmas: &[T],
        oracle: Option<&[Vector<T>]>,
        wall_time_per_step: f64,
    ) -> Result<Self> {
        let per_step_error = per_step_error(estimates, truth)?;
        let ctte_series = cumulative_sum(&per_step_error);
        let ctte = ctte_series.last().copied().unwrap_or(T::zero());
        let (n1, n2) = noise_cumulants(sigmas)?;
        let (oracle_gap, optimal_path_length) = match oracle {
            Some(xhat) => (
                Some(self::per_step_error(estimates, xhat)?),
                Some(path_length(xhat)),
            ),
            None => (None, None),
        };
        Ok(RunMetrics {
            per_step_error,
            ctte,
            ctte_series,
            oracle_gap,
            path_length_v: path_length(truth),
            optimal_path_length,
            n1,
            n2,
            dynamic_regret: None,
            wall_time_per_step,
        })
    }

    pub fn horizon(&self) -> usize {
        self.per_step_error.len()
    }

    /// Pointwise arithmetic mean, reduced in slice order.
    pub fn mean(runs: &[&RunMetrics<T>]) -> Option<Self> {
        let first = runs.first()?;
        let count = T::of(runs.len() as f64);
        let horizon = first.horizon();
        let mean_series = |get: &dyn Fn(&RunMetrics<T>) -> &[T]| -> Vec<T> {
            let mut acc = vec![T::zero(); horizon];
            for r in runs {
                for (a, &x) in acc.iter_mut().zip(get(r)) {
                    *a += x;
                }
            }
            acc.into_iter().map(|a| a / count).collect()
        };
        let mean_scalar = |get: &dyn Fn(&RunMetrics<T>) -> T| -> T {
            runs.iter().map(|r| get(r)).fold(T::zero(), |a, b| a + b) / count
        };
        let all_some = |get: &dyn Fn(&RunMetrics<T>) -> bool| runs.iter().all(|r| get(r));

        let per_step_error = mean_series(&|r| &r.per_step_error);
        let ctte_series = mean_series(&|r| &r.ctte_series);
        let oracle_gap = all_some(&|r| r.oracle_gap.is_some())
            .then(|| mean_series(&|r| r.oracle_gap.as_deref().unwrap_or(&[])));
        let optimal_path_length = all_some(&|r| r.optimal_path_length.is_some())
            .then(|| mean_scalar(&|r| r.optimal_path_length.unwrap_or(T::zero())));
        let dynamic_regret = all_some(&|r| r.dynamic_regret.is_some())
            .then(|| mean_scalar(&|r| r.dynamic_regret.unwrap_or(T::zero())));
        Some(RunMetrics {
            ctte: ctte_series.last().copied().unwrap_or(T::zero()),
            per_step_error,
            ctte_series,
            oracle_gap,
            path_length_v: mean_scalar(&|r| r.path_length_v),
            optimal_path_length,
            n1: mean_scalar(&|r| r.n1),
            n2: mean_scalar(&|r| r.n2),
            dynamic_regret,
            wall_time_per_step: runs.iter().map(|r| r.wall_time_per_step).sum::<f64>()
                / runs.len() as f64,
        })
    }
}
