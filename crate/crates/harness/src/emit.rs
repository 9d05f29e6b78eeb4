//! Writes a scenario result to disk: per-step CSV, JSON report, SVG plots and
//! a manifest of SHA-256 checksums.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use toa_core::analysis::ConvexityReport;
use toa_core::Method;

use crate::bench::TimingTable;
use crate::config::ScenarioConfig;
use crate::error::{HarnessError, Result};
use crate::plot::{line_chart, Series};
use crate::simulate::{FailedRun, Provenance, ScenarioResult};

pub const CSV_FILE: &str = "per_step.csv";
pub const REPORT_FILE: &str = "report.json";
pub const TIMING_FILE: &str = "timing.json";
pub const CTTE_PLOT: &str = "ctte.svg";
pub const TRAJECTORY_PLOT: &str = "trajectory.svg";
pub const MANIFEST_FILE: &str = "manifest.json";

const METHOD_ORDER: [Method; 2] = [Method::Ogd, Method::Onm];

fn configured(result: &ScenarioResult) -> Vec<Method> {
    METHOD_ORDER
        .into_iter()
        .filter(|m| result.config.methods.contains(m))
        .collect()
}

fn num(s: &mut String, v: f64) {
    let _ = write!(s, ",{v:.16e}");
}

/// Per-step table. Position columns come from run 0; `err_*` and `ctte_*`
/// are Monte Carlo means. Entries after a failure are left empty.
pub fn per_step_csv(result: &ScenarioResult) -> String {
    let run = &result.representative;
    let n = result.config.x1_true.len();
    let methods = configured(result);
    let oracle = run.oracle.as_deref();

    let mut out = String::from("t");
    let mut block = |prefix: &str| {
        for k in 1..=n {
            let _ = write!(out, ",{prefix}_{k}");
        }
    };
    block("true");
    for m in &methods {
        block(m.column_prefix());
    }
    if oracle.is_some() {
        block("xhat");
    }
    for kind in ["err", "ctte"] {
        for m in &methods {
            let _ = write!(out, ",{kind}_{}", m.column_prefix());
        }
    }
    out.push('\n');

    let empty = |s: &mut String, count: usize| (0..count).for_each(|_| s.push(','));
    for t in 1..=result.config.horizon {
        let mut row = t.to_string();
        run.truth.at(t).iter().for_each(|&v| num(&mut row, v));
        for m in &methods {
            match run.method(*m).and_then(|tr| tr.estimates.get(t - 1)) {
                Some(x) => x.iter().for_each(|&v| num(&mut row, v)),
                None => empty(&mut row, n),
            }
        }
        if let Some(xhat) = oracle {
            xhat[t - 1].iter().for_each(|&v| num(&mut row, v));
        }
        for series in [0, 1] {
            for m in &methods {
                let mean = result.method(*m).and_then(|s| s.mean.as_ref());
                match mean {
                    Some(mean) if series == 0 => num(&mut row, mean.per_step_error[t - 1]),
                    Some(mean) => num(&mut row, mean.ctte_series[t - 1]),
                    None => empty(&mut row, 1),
                }
            }
        }
        row.push('\n');
        out.push_str(&row);
    }
    out
}

#[derive(Serialize)]
struct MethodReport<'a> {
    method: Method,
    successes: usize,
    failures: &'a [FailedRun],
    mean_fallbacks: f64,
    ctte: Option<f64>,
    path_length_v: Option<f64>,
    optimal_path_length: Option<f64>,
    #[serde(rename = "N1")]
    n1: Option<f64>,
    #[serde(rename = "N2")]
    n2: Option<f64>,
    dynamic_regret: Option<f64>,
}

#[derive(Serialize)]
struct Report<'a> {
    name: &'a str,
    provenance: &'a Provenance,
    mc_runs: usize,
    max_noise_ratio: f64,
    methods: Vec<MethodReport<'a>>,
    convexity: Option<&'a ConvexityReport<f64>>,
    config: &'a ScenarioConfig,
}

/// Scenario summary. Contains no timings, so it is reproducible byte for byte.
pub fn report_json(result: &ScenarioResult) -> Result<String> {
    let methods = result
        .methods
        .iter()
        .map(|s| {
            let mean = s.mean.as_ref();
            MethodReport {
                method: s.method,
                successes: s.successes,
                failures: &s.failures,
                mean_fallbacks: s.mean_fallbacks,
                ctte: mean.map(|m| m.ctte),
                path_length_v: mean.map(|m| m.path_length_v),
                optimal_path_length: mean.and_then(|m| m.optimal_path_length),
                n1: mean.map(|m| m.n1),
                n2: mean.map(|m| m.n2),
                dynamic_regret: mean.and_then(|m| m.dynamic_regret),
            }
        })
        .collect();
    let report = Report {
        name: &result.config.name,
        provenance: &result.provenance,
        mc_runs: result.config.mc_runs,
        max_noise_ratio: result.max_noise_ratio,
        methods,
        convexity: result.convexity.as_ref(),
        config: &result.config,
    };
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

#[derive(Serialize)]
struct Timing<'a> {
    /// Mean wall time per tracker update inside the Monte Carlo runs.
    run_seconds_per_step: Vec<(Method, f64)>,
    benchmark: Option<&'a TimingTable>,
}

fn timing_json(result: &ScenarioResult, table: Option<&TimingTable>) -> Result<String> {
    let run_seconds_per_step = result
        .methods
        .iter()
        .filter_map(|s| Some((s.method, s.mean.as_ref()?.wall_time_per_step)))
        .collect();
    Ok(serde_json::to_string_pretty(&Timing {
        run_seconds_per_step,
        benchmark: table,
    })? + "\n")
}

pub fn ctte_svg(result: &ScenarioResult) -> String {
    let series: Vec<Series<'_>> = configured(result)
        .into_iter()
        .filter_map(|m| {
            let ctte = result.ctte_series(m)?;
            Some(Series {
                label: m.label(),
                points: ctte
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| ((k + 1) as f64, c))
                    .collect(),
                dashed: false,
            })
        })
        .collect();
    let title = format!(
        "{}: mean CTTE over {} runs",
        result.config.name, result.config.mc_runs
    );
    line_chart(&title, "t", "CTTE", &series, false)
}

/// Run-0 paths in the first two coordinates.
pub fn trajectory_svg(result: &ScenarioResult) -> String {
    let run = &result.representative;
    let xy = |pts: &[toa_core::Vector<f64>]| -> Vec<(f64, f64)> {
        pts.iter()
            .map(|p| (p[0], if p.dim() > 1 { p[1] } else { 0.0 }))
            .collect()
    };
    let mut series = vec![Series {
        label: "true",
        points: xy(run.truth.positions()),
        dashed: false,
    }];
    for m in configured(result) {
        if let Some(tr) = run.method(m) {
            series.push(Series {
                label: m.label(),
                points: xy(&tr.estimates),
                dashed: false,
            });
        }
    }
    if let Some(xhat) = &run.oracle {
        series.push(Series {
            label: "least squares",
            points: xy(xhat),
            dashed: true,
        });
    }
    let title = format!("{}: tracking trajectories (run 0)", result.config.name);
    line_chart(&title, "x_1", "x_2", &series, true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub scenario: String,
    pub provenance: Provenance,
    pub files: Vec<ManifestEntry>,
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<ManifestEntry> {
    let path: PathBuf = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| HarnessError::io(&path, e))?;
    Ok(ManifestEntry {
        path: name.to_string(),
        bytes: contents.len(),
        sha256: hex::encode(Sha256::digest(contents)),
    })
}

/// Writes every artifact into `out_dir` (created if missing) and returns the
/// manifest, which is also written as `manifest.json`.
pub fn emit(
    result: &ScenarioResult,
    out_dir: &Path,
    timing: Option<&TimingTable>,
) -> Result<Manifest> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let files = vec![
        write_file(out_dir, CSV_FILE, per_step_csv(result).as_bytes())?,
        write_file(out_dir, REPORT_FILE, report_json(result)?.as_bytes())?,
        write_file(out_dir, CTTE_PLOT, ctte_svg(result).as_bytes())?,
        write_file(out_dir, TRAJECTORY_PLOT, trajectory_svg(result).as_bytes())?,
        write_file(
            out_dir,
            TIMING_FILE,
            timing_json(result, timing)?.as_bytes(),
        )?,
    ];
    let manifest = Manifest {
        scenario: result.config.name.clone(),
        provenance: result.provenance.clone(),
        files,
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    write_file(out_dir, MANIFEST_FILE, text.as_bytes())?;
    Ok(manifest)
}
