//! Single runs and Monte Carlo aggregation.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use toa_core::analysis::{check_tracking_conditions, ConvexityReport};
use toa_core::estimators::{batch_least_squares, ols_initialize};
use toa_core::geometry::measure;
use toa_core::rng::{stream, Domain};
use toa_core::{
    Error as CoreError, LossSnapshot, MeasurementFrame, Method, NoiseSchedule, RunMetrics,
    SensorArray, TrackerState, Trajectory, Vector,
};

use crate::config::{InitMode, ScenarioConfig, TrajectorySpec};
use crate::error::{HarnessError, Result};

/// Where and why a tracker stopped early.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunFailure {
    /// 1-based time step of the failed update.
    pub step: usize,
    pub reason: String,
}

/// One tracker's path through one run.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodTrace {
    pub method: Method,
    /// `x_1, ..., x_t` up to the last successful step.
    pub estimates: Vec<Vector<f64>>,
    /// `None` when the run failed.
    pub metrics: Option<RunMetrics<f64>>,
    pub failure: Option<RunFailure>,
    pub fallback_count: usize,
    /// Combined checksum of every frame this tracker consumed.
    pub frames_checksum: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleRun {
    pub run_index: usize,
    pub truth: Trajectory<f64>,
    pub sigmas: Vec<f64>,
    pub x0: Vector<f64>,
    /// Per-step least-squares estimates, when an oracle is configured.
    pub oracle: Option<Vec<Vector<f64>>>,
    pub methods: Vec<MethodTrace>,
    /// Largest `|noise| / distance` over all frames.
    pub max_noise_ratio: f64,
}

impl SingleRun {
    pub fn method(&self, method: Method) -> Option<&MethodTrace> {
        self.methods.iter().find(|m| m.method == method)
    }
}

pub(crate) fn trajectory_for(cfg: &ScenarioConfig, run: usize) -> Result<Trajectory<f64>> {
    match &cfg.trajectory {
        TrajectorySpec::RandomWalk { step_scale } => {
            let mut rng = stream(cfg.root_seed, Domain::Trajectory, run as u64, 0);
            Ok(Trajectory::random_walk(
                &cfg.x1(),
                cfg.horizon,
                *step_scale,
                &mut rng,
            )?)
        }
        TrajectorySpec::Fixed { points } => Ok(Trajectory::new(
            points.iter().map(|p| Vector::from_slice(p)).collect(),
        )?),
    }
}

pub(crate) fn frames_for(
    cfg: &ScenarioConfig,
    run: usize,
    sensors: &SensorArray<f64>,
    truth: &Trajectory<f64>,
    noise: &NoiseSchedule<f64>,
) -> Result<Vec<MeasurementFrame<f64>>> {
    (1..=cfg.horizon)
        .map(|t| {
            let mut rng = stream(cfg.root_seed, Domain::Measurement, run as u64, t as u64);
            Ok(measure(sensors, truth.at(t), t, noise.sigma(t), &mut rng)?)
        })
        .collect()
}

fn combine_checksum(acc: u64, frame: u64) -> u64 {
    acc.rotate_left(5) ^ frame.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

struct Tracked {
    estimates: Vec<Vector<f64>>,
    failure: Option<RunFailure>,
    fallback_count: usize,
    frames_checksum: u64,
    seconds_per_step: f64,
}

fn track(
    method: Method,
    cfg: &ScenarioConfig,
    sensors: &SensorArray<f64>,
    frames: &[MeasurementFrame<f64>],
    x0: &Vector<f64>,
) -> Result<Tracked> {
    let mut state = TrackerState::new(method, x0.clone(), cfg.eta)?;
    let mut estimates = Vec::with_capacity(frames.len());
    let mut checksum = 0u64;
    let started = Instant::now();
    for frame in frames {
        checksum = combine_checksum(checksum, frame.checksum());
        let loss = LossSnapshot::new(sensors, frame)?;
        match state.step(&loss) {
            Ok(next) if next.estimate.is_finite() => state = next,
            Ok(_) => {
                let failure = RunFailure {
                    step: frame.t,
                    reason: "non-finite estimate".into(),
                };
                return Ok(Tracked {
                    estimates,
                    failure: Some(failure),
                    fallback_count: state.fallback_count,
                    frames_checksum: checksum,
                    seconds_per_step: 0.0,
                });
            }
            Err(e @ CoreError::AnchorProximity { .. }) => {
                let failure = RunFailure {
                    step: frame.t,
                    reason: e.to_string(),
                };
                return Ok(Tracked {
                    estimates,
                    failure: Some(failure),
                    fallback_count: state.fallback_count,
                    frames_checksum: checksum,
                    seconds_per_step: 0.0,
                });
            }
            Err(e) => return Err(e.into()),
        }
        estimates.push(state.estimate.clone());
    }
    Ok(Tracked {
        estimates,
        failure: None,
        fallback_count: state.fallback_count,
        frames_checksum: checksum,
        seconds_per_step: started.elapsed().as_secs_f64() / frames.len() as f64,
    })
}

/// Runs every configured method through `t = 1..T` on one trajectory and one
/// measurement stream, both derived from `(root_seed, run_index)`.
pub fn run_single(cfg: &ScenarioConfig, run_index: usize) -> Result<SingleRun> {
    cfg.validate()?;
    let sensors = cfg.sensor_array()?;
    let noise = cfg.noise.schedule()?;
    let truth = trajectory_for(cfg, run_index)?;
    let frames = frames_for(cfg, run_index, &sensors, &truth, &noise)?;
    let sigmas = noise.sigmas(cfg.horizon);
    let max_noise_ratio = frames
        .iter()
        .map(|f| f.max_noise_ratio(&sensors, truth.at(f.t)))
        .fold(0.0, f64::max);

    let x0 = match cfg.init {
        InitMode::Exact => truth.at(1).clone(),
        InitMode::Ols => ols_initialize(&sensors, &frames[0])?,
    };

    let oracle = match &cfg.oracle {
        Some(ocfg) => Some(
            frames
                .iter()
                .map(|f| {
                    let loss = LossSnapshot::new(&sensors, f)?;
                    Ok(batch_least_squares(&loss, truth.at(f.t), ocfg)?.point)
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };

    let mut methods = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let Tracked {
            estimates,
            failure,
            fallback_count,
            frames_checksum,
            seconds_per_step: wall,
        } = track(method, cfg, &sensors, &frames, &x0)?;
        let metrics = match failure {
            Some(_) => None,
            None => {
                let mut m = RunMetrics::compute(
                    &estimates,
                    truth.positions(),
                    &sigmas,
                    oracle.as_deref(),
                    wall,
                )?;
                if let Some(xhat) = &oracle {
                    m.dynamic_regret = Some(dynamic_regret(&sensors, &frames, &estimates, xhat)?);
                }
                Some(m)
            }
        };
        methods.push(MethodTrace {
            method,
            estimates,
            metrics,
            failure,
            fallback_count,
            frames_checksum,
        });
    }

    Ok(SingleRun {
        run_index,
        truth,
        sigmas,
        x0,
        oracle,
        methods,
        max_noise_ratio,
    })
}

fn dynamic_regret(
    sensors: &SensorArray<f64>,
    frames: &[MeasurementFrame<f64>],
    estimates: &[Vector<f64>],
    xhat: &[Vector<f64>],
) -> Result<f64> {
    let mut total = 0.0;
    for ((f, x), h) in frames.iter().zip(estimates).zip(xhat) {
        let loss = LossSnapshot::new(sensors, f)?;
        total += loss.value(x)? - loss.value(h)?;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailedRun {
    pub run: usize,
    pub step: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    /// Pointwise mean over successful runs.
    pub mean: Option<RunMetrics<f64>>,
    pub successes: usize,
    pub failures: Vec<FailedRun>,
    pub mean_fallbacks: f64,
    /// Per-run metrics in run order (successful runs only), when retained.
    pub raw: Option<Vec<RunMetrics<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub root_seed: u64,
    pub code_version: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioResult {
    pub config: ScenarioConfig,
    pub provenance: Provenance,
    pub methods: Vec<MethodSummary>,
    /// Run 0, kept whole for the trajectory columns and plots.
    pub representative: SingleRun,
    pub convexity: Option<ConvexityReport<f64>>,
    pub max_noise_ratio: f64,
}

impl ScenarioResult {
    pub fn method(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method)
    }

    /// Mean CTTE series of `method`.
    pub fn ctte_series(&self, method: Method) -> Option<&[f64]> {
        Some(&self.method(method)?.mean.as_ref()?.ctte_series)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MonteCarloOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub keep_raw: bool,
}

/// Per-run record kept after the traces are dropped.
struct RunRecord {
    metrics: Vec<(Option<RunMetrics<f64>>, Option<RunFailure>, usize)>,
    max_noise_ratio: f64,
    full: Option<SingleRun>,
}

/// Runs `mc_runs` independent runs and averages per method in run order, so
/// the result does not depend on the thread count.
pub fn run_monte_carlo(cfg: &ScenarioConfig, opts: MonteCarloOptions) -> Result<ScenarioResult> {
    cfg.validate()?;
    let work = || -> Result<Vec<RunRecord>> {
        (0..cfg.mc_runs)
            .into_par_iter()
            .map(|run| {
                let single = run_single(cfg, run)?;
                let metrics = single
                    .methods
                    .iter()
                    .map(|m| (m.metrics.clone(), m.failure.clone(), m.fallback_count))
                    .collect();
                Ok(RunRecord {
                    metrics,
                    max_noise_ratio: single.max_noise_ratio,
                    full: (run == 0).then_some(single),
                })
            })
            .collect()
    };
    let records = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(work)?,
        None => work()?,
    };

    let mut methods = Vec::with_capacity(cfg.methods.len());
    for (k, &method) in cfg.methods.iter().enumerate() {
        let mut ok = Vec::new();
        let mut failures = Vec::new();
        let mut fallbacks = 0usize;
        for (run, rec) in records.iter().enumerate() {
            let (metrics, failure, fb) = &rec.metrics[k];
            fallbacks += fb;
            match (metrics, failure) {
                (Some(m), None) => ok.push(m),
                (_, Some(f)) => failures.push(FailedRun {
                    run,
                    step: f.step,
                    reason: f.reason.clone(),
                }),
                (None, None) => unreachable!("run without metrics or failure"),
            }
        }
        if failures.len() * 10 > cfg.mc_runs {
            return Err(HarnessError::TooManyFailures {
                method,
                failed: failures.len(),
                runs: cfg.mc_runs,
            });
        }
        methods.push(MethodSummary {
            method,
            mean: RunMetrics::mean(&ok),
            successes: ok.len(),
            failures,
            mean_fallbacks: fallbacks as f64 / cfg.mc_runs as f64,
            raw: opts
                .keep_raw
                .then(|| ok.iter().map(|m| (*m).clone()).collect()),
        });
    }

    let max_noise_ratio = records
        .iter()
        .map(|r| r.max_noise_ratio)
        .fold(0.0, f64::max);
    let representative = records
        .into_iter()
        .next()
        .and_then(|r| r.full)
        .expect("mc_runs >= 1");

    let convexity = match &cfg.analysis {
        Some(acfg) => Some(check_tracking_conditions(
            acfg,
            &cfg.sensor_array()?,
            &representative.truth,
            &cfg.noise.schedule()?,
            cfg.eta,
            &representative.x0,
        )),
        None => None,
    };

    Ok(ScenarioResult {
        config: cfg.clone(),
        provenance: Provenance {
            config_hash: cfg.hash()?,
            root_seed: cfg.root_seed,
            code_version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"))
                .to_string(),
        },
        methods,
        representative,
        convexity,
        max_noise_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{NoiseLaw, NoiseSpec};
    use crate::presets::preset;

    fn small(name: &str, horizon: usize, runs: usize) -> ScenarioConfig {
        let mut cfg = preset(name).unwrap();
        cfg.horizon = horizon;
        cfg.mc_runs = runs;
        cfg
    }

    fn noiseless_static() -> ScenarioConfig {
        let mut cfg = small("A1", 200, 1);
        cfg.noise = NoiseSpec {
            kind: NoiseLaw::Constant,
            level: 0.0,
            c0: 3.0,
        };
        cfg.trajectory = TrajectorySpec::RandomWalk { step_scale: 0.0 };
        cfg
    }

    #[test]
    fn noiseless_static_target_is_a_fixed_point() {
        let run = run_single(&noiseless_static(), 0).unwrap();
        for trace in &run.methods {
            let m = trace.metrics.as_ref().unwrap();
            assert!(
                m.per_step_error.iter().all(|&e| e < 1e-9),
                "{}",
                trace.method
            );
        }
    }

    #[test]
    fn methods_share_frames() {
        let run = run_single(&small("A2", 50, 1), 3).unwrap();
        let sums: Vec<u64> = run.methods.iter().map(|m| m.frames_checksum).collect();
        assert_eq!(sums.len(), 2);
        assert_eq!(sums[0], sums[1]);
        assert_ne!(
            sums[0],
            run_single(&small("A2", 50, 1), 4).unwrap().methods[0].frames_checksum
        );
    }

    #[test]
    fn single_run_is_reproducible() {
        let cfg = small("A1", 100, 1);
        let a = run_single(&cfg, 0).unwrap();
        let b = run_single(&cfg, 0).unwrap();
        for (x, y) in a.methods.iter().zip(&b.methods) {
            assert_eq!(x.estimates, y.estimates);
            let (mx, my) = (x.metrics.as_ref().unwrap(), y.metrics.as_ref().unwrap());
            assert_eq!(mx.ctte_series, my.ctte_series);
        }
    }

    #[test]
    fn one_run_monte_carlo_equals_single() {
        let cfg = small("A3", 80, 1);
        let mc = run_monte_carlo(&cfg, MonteCarloOptions::default()).unwrap();
        let single = run_single(&cfg, 0).unwrap();
        for trace in &single.methods {
            let mean = mc.method(trace.method).unwrap().mean.as_ref().unwrap();
            let m = trace.metrics.as_ref().unwrap();
            assert_eq!(mean.ctte_series, m.ctte_series);
            assert_eq!(mean.per_step_error, m.per_step_error);
        }
    }

    #[test]
    fn mean_is_pointwise_average_of_raw_runs() {
        let cfg = small("A2", 60, 7);
        let opts = MonteCarloOptions {
            threads: Some(3),
            keep_raw: true,
        };
        let mc = run_monte_carlo(&cfg, opts).unwrap();
        for s in &mc.methods {
            let raw = s.raw.as_ref().unwrap();
            assert_eq!(raw.len(), 7);
            let mean = s.mean.as_ref().unwrap();
            for t in [0, 29, 59] {
                let avg = raw.iter().map(|r| r.ctte_series[t]).sum::<f64>() / 7.0;
                assert!((avg - mean.ctte_series[t]).abs() <= 1e-15 * avg.abs().max(1.0));
            }
        }
    }

    #[test]
    fn zero_noise_monte_carlo_is_exact() {
        let mut cfg = noiseless_static();
        cfg.mc_runs = 100;
        cfg.horizon = 50;
        let mc = run_monte_carlo(&cfg, MonteCarloOptions::default()).unwrap();
        assert!(mc.method(Method::Ogd).unwrap().mean.as_ref().unwrap().ctte < 1e-6);
    }

    #[test]
    fn oracle_series_and_ols_init() {
        let mut cfg = small("A3", 40, 1);
        cfg.oracle = Some(toa_core::OracleConfig::for_sensors(3));
        cfg.init = InitMode::Ols;
        let run = run_single(&cfg, 0).unwrap();
        let xhat = run.oracle.as_ref().unwrap();
        assert_eq!(xhat.len(), 40);
        // ranges at t = 1 are close to exact, so the OLS start is close to x_1*
        assert!(run.x0.distance(run.truth.at(1)) < 0.5);
        assert!(run.x0 != *run.truth.at(1));
        let m = run.methods[0].metrics.as_ref().unwrap();
        assert!(
            m.oracle_gap.is_some() && m.optimal_path_length.is_some() && m.dynamic_regret.is_some()
        );
    }

    #[test]
    fn anchor_hit_marks_failure() {
        // a fixed target sitting on a sensor: the first update hits the guard
        let mut cfg = small("A1", 5, 1);
        cfg.x1_true = vec![0.5, 0.5];
        cfg.trajectory = TrajectorySpec::Fixed {
            points: vec![vec![0.5, 0.5]; 5],
        };
        let run = run_single(&cfg, 0).unwrap();
        for trace in &run.methods {
            assert_eq!(trace.failure.as_ref().unwrap().step, 1);
            assert!(trace.metrics.is_none());
        }
        assert!(matches!(
            run_monte_carlo(&cfg, MonteCarloOptions::default()),
            Err(HarnessError::TooManyFailures { .. })
        ));
    }
}
