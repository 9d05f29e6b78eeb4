//! Convexity diagnostics and the estimation-error regression for a scenario.

use std::path::Path;

use serde::Serialize;
use toa_core::analysis::{
    check_tracking_conditions, estimation_error_scaling, lemma_suite, ConvexityConfig,
    ConvexityReport, LemmaSuiteReport, ScalingReport,
};
use toa_core::OracleConfig;

use crate::config::ScenarioConfig;
use crate::emit::{write_file, ManifestEntry};
use crate::error::{HarnessError, Result};
use crate::simulate::run_single;

pub const ANALYSIS_FILE: &str = "analysis.json";

/// Noise levels from 1e-4 to 1e-2, doubling between neighbours below the top.
pub const SIGMA_GRID: [f64; 8] = [1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3, 3.2e-3, 6.4e-3, 1e-2];
pub const DEFAULT_RUNS_PER_SIGMA: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyzeOptions {
    pub sigma_grid: Vec<f64>,
    pub runs_per_sigma: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            sigma_grid: SIGMA_GRID.to_vec(),
            runs_per_sigma: DEFAULT_RUNS_PER_SIGMA,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub scenario: String,
    /// Conditions with `K1 = K2 = 0`.
    pub idealized: ConvexityReport<f64>,
    /// Conditions with `K1`, `K2` from the regression, when the fit succeeded.
    pub empirical: Option<ConvexityReport<f64>>,
    pub scaling: ScalingReport<f64>,
}

/// Evaluates the tracking conditions on run 0 of `cfg`, both idealized and
/// with fitted constants, and runs the estimation-error regression at `x1_true`.
pub fn analyze(cfg: &ScenarioConfig, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    let sensors = cfg.sensor_array()?;
    let noise = cfg.noise.schedule()?;
    let mut probe_cfg = cfg.clone();
    probe_cfg.oracle = None;
    let run = run_single(&probe_cfg, 0)?;

    let base = cfg.analysis.clone().unwrap_or_else(|| ConvexityConfig {
        seed: cfg.root_seed,
        ..ConvexityConfig::idealized()
    });
    let idealized_cfg = ConvexityConfig {
        k1: 0.0,
        k2: 0.0,
        mode: toa_core::analysis::ConstantsMode::Idealized,
        ..base.clone()
    };
    let idealized = check_tracking_conditions(
        &idealized_cfg,
        &sensors,
        &run.truth,
        &noise,
        cfg.eta,
        &run.x0,
    );

    let oracle = cfg
        .oracle
        .unwrap_or_else(|| OracleConfig::for_sensors(sensors.m()));
    let scaling = estimation_error_scaling(
        &sensors,
        &cfg.x1(),
        &opts.sigma_grid,
        opts.runs_per_sigma,
        &oracle,
        cfg.root_seed,
    )?;
    let empirical = scaling.fit.as_ref().map(|fit| {
        let ecfg = ConvexityConfig {
            k1: fit.k1.max(0.0),
            k2: fit.k2.max(0.0),
            mode: toa_core::analysis::ConstantsMode::Empirical,
            ..base.clone()
        };
        check_tracking_conditions(&ecfg, &sensors, &run.truth, &noise, cfg.eta, &run.x0)
    });

    Ok(AnalysisReport {
        scenario: cfg.name.clone(),
        idealized,
        empirical,
        scaling,
    })
}

pub fn write_analysis(report: &AnalysisReport, out_dir: &Path) -> Result<ManifestEntry> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let text = serde_json::to_string_pretty(report)? + "\n";
    write_file(out_dir, ANALYSIS_FILE, text.as_bytes())
}

pub const LEMMA_EIG_PAIRS: usize = 1000;
pub const LEMMA_UNIT_PAIRS: usize = 100_000;

/// The eigenvalue and unit-vector identity suites at their standard sizes.
pub fn run_lemmas(seed: u64) -> LemmaSuiteReport {
    lemma_suite(LEMMA_EIG_PAIRS, LEMMA_UNIT_PAIRS, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    #[test]
    fn reference_scenario_analysis() {
        let mut cfg = preset("A1").unwrap();
        cfg.horizon = 50;
        let opts = AnalyzeOptions {
            sigma_grid: vec![1e-4, 1e-3, 1e-2],
            runs_per_sigma: 50,
        };
        let report = analyze(&cfg, &opts).unwrap();
        assert!(report.idealized.kappa_positive);
        assert!(report.idealized.lambda > 0.0 && report.idealized.lambda < 0.0642);
        let fit = report.scaling.fit.as_ref().unwrap();
        assert!(fit.k1 > 0.0);
        let emp = report.empirical.as_ref().unwrap();
        assert!(emp.noise_radius > 0.0 && emp.kappa < report.idealized.kappa);

        let dir = tempfile::tempdir().unwrap();
        let entry = write_analysis(&report, dir.path()).unwrap();
        assert_eq!(entry.path, ANALYSIS_FILE);
    }

    #[test]
    fn lemma_suites_pass() {
        let r = lemma_suite(200, 5000, 1);
        assert!(r.eig_ok(1e-10) && r.unit_ok());
    }
}
