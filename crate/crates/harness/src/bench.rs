//! Per-iteration timing of the two trackers.

use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;
use toa_core::estimators::{ogd_step, onm_step};
use toa_core::{LossSnapshot, Method, TrackerState, Vector};

use crate::config::{NoiseLaw, ScenarioConfig};
use crate::error::{HarnessError, Result};
use crate::simulate::{frames_for, trajectory_for};

pub const MIN_ITERATIONS: usize = 1000;
pub const WARMUP: usize = 100;
/// Calls per timed sample; single calls are close to the timer resolution.
const BATCH: usize = 32;
const SNAPSHOTS: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingRow {
    pub scenario: String,
    pub noise: String,
    pub iterations: usize,
    pub ogd_seconds: f64,
    pub onm_seconds: f64,
    /// `onm_seconds / ogd_seconds`
    pub ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
}

pub fn noise_label(cfg: &ScenarioConfig) -> String {
    let level = cfg.noise.level;
    match cfg.noise.kind {
        NoiseLaw::Constant => format!("sigma = {level}"),
        NoiseLaw::InverseSqrt => format!("sigma = {level}/sqrt(t)"),
        NoiseLaw::ScaledInverseSqrt => format!("sigma = {level}/sqrt(2t)"),
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Median wall-clock cost of one `ogd_step` and one `onm_step` on the same
/// snapshots, taken from run 0 of `cfg` with the estimate slightly off target.
/// OGD and ONM samples are interleaved so drift affects both alike.
pub fn benchmark_per_iteration(cfg: &ScenarioConfig, iterations: usize) -> Result<TimingRow> {
    if iterations < MIN_ITERATIONS {
        return Err(HarnessError::Config(format!(
            "benchmark needs at least {MIN_ITERATIONS} iterations, got {iterations}"
        )));
    }
    let mut short = cfg.clone();
    short.horizon = cfg.horizon.min(SNAPSHOTS);
    let sensors = short.sensor_array()?;
    let noise = short.noise.schedule()?;
    let truth = trajectory_for(&short, 0)?;
    let frames = frames_for(&short, 0, &sensors, &truth, &noise)?;
    let offset = Vector::from_slice(&vec![0.01; sensors.n()]);
    let cases: Vec<(LossSnapshot<'_, f64>, TrackerState<f64>)> = frames
        .iter()
        .map(|f| {
            let loss = LossSnapshot::new(&sensors, f)?;
            let x = truth.at(f.t) + &offset;
            Ok((loss, TrackerState::new(Method::Ogd, x, cfg.eta)?))
        })
        .collect::<toa_core::Result<_>>()?;

    let time_batch = |start: usize, newton: bool| -> f64 {
        let t0 = Instant::now();
        for k in 0..BATCH {
            let (loss, state) = &cases[(start + k) % cases.len()];
            let out = if newton {
                onm_step(black_box(state), black_box(loss))
            } else {
                ogd_step(black_box(state), black_box(loss))
            };
            black_box(out.ok());
        }
        t0.elapsed().as_secs_f64() / BATCH as f64
    };

    for k in 0..WARMUP {
        time_batch(k, false);
        time_batch(k, true);
    }
    let mut ogd = Vec::with_capacity(iterations);
    let mut onm = Vec::with_capacity(iterations);
    for k in 0..iterations {
        if k % 2 == 0 {
            ogd.push(time_batch(k, false));
            onm.push(time_batch(k, true));
        } else {
            onm.push(time_batch(k, true));
            ogd.push(time_batch(k, false));
        }
    }
    let (ogd_seconds, onm_seconds) = (median(ogd), median(onm));
    Ok(TimingRow {
        scenario: cfg.name.clone(),
        noise: noise_label(cfg),
        iterations,
        ogd_seconds,
        onm_seconds,
        ratio: onm_seconds / ogd_seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn rejects_short_benchmarks() {
        assert!(benchmark_per_iteration(&preset("A1").unwrap(), 10).is_err());
    }

    #[test]
    fn row_is_labelled() {
        let row = benchmark_per_iteration(&preset("A3").unwrap(), MIN_ITERATIONS).unwrap();
        assert_eq!(row.scenario, "A3");
        assert_eq!(row.noise, "sigma = 0.01/sqrt(t)");
        assert!(row.ogd_seconds > 0.0 && row.onm_seconds > 0.0);
    }
}
