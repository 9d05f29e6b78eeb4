use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use toa_core::OracleConfig;
use toa_harness::analyze::{
    analyze, run_lemmas, write_analysis, AnalyzeOptions, DEFAULT_RUNS_PER_SIGMA,
};
use toa_harness::bench::{benchmark_per_iteration, TimingTable, MIN_ITERATIONS};
use toa_harness::emit::emit;
use toa_harness::{preset, run_monte_carlo, InitMode, MonteCarloOptions, ScenarioConfig};

/// Online tracking of a moving source from time-of-arrival ranges.
#[derive(Parser)]
#[command(name = "toatrack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo run of a preset or TOML scenario; writes CSV, report and plots.
    Run {
        /// Preset name (A1..C2) or path to a TOML config.
        target: String,
        #[command(flatten)]
        common: Common,
    },
    /// Median per-iteration cost of OGD and ONM.
    Bench {
        preset: String,
        #[arg(long, default_value_t = MIN_ITERATIONS)]
        iterations: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Convexity conditions and the estimation-error regression.
    Analyze {
        target: String,
        #[arg(long, default_value_t = DEFAULT_RUNS_PER_SIGMA)]
        runs_per_sigma: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Randomized checks of the eigenvalue and unit-vector identities.
    Lemmas {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    mc_runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: out/<scenario>]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Also compute the per-step least-squares estimates.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_parser = ["exact", "ols"])]
    init: Option<String>,
}

impl Common {
    fn scenario(&self, target: &str) -> Result<ScenarioConfig> {
        let path = Path::new(target);
        let mut cfg = if path.is_file() {
            ScenarioConfig::load(path)?
        } else if target.ends_with(".toml") {
            bail!("config file {target} not found");
        } else {
            preset(target)?
        };
        if let Some(n) = self.mc_runs {
            cfg.mc_runs = n;
        }
        if let Some(seed) = self.seed {
            cfg.root_seed = seed;
        }
        if self.oracle && cfg.oracle.is_none() {
            cfg.oracle = Some(OracleConfig::for_sensors(cfg.sensors.len()));
        }
        if let Some(init) = &self.init {
            cfg.init = init.parse::<InitMode>()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ScenarioConfig) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| Path::new("out").join(&cfg.name))
    }

    fn mc_options(&self) -> MonteCarloOptions {
        MonteCarloOptions {
            threads: self.threads,
            keep_raw: false,
        }
    }
}

fn run(target: &str, common: &Common) -> Result<()> {
    let cfg = common.scenario(target)?;
    let result = run_monte_carlo(&cfg, common.mc_options())
        .with_context(|| format!("scenario {}", cfg.name))?;
    let out = common.out_dir(&cfg);
    let manifest = emit(&result, &out, None)?;

    println!(
        "{} (T = {}, {} runs, seed {})",
        cfg.name, cfg.horizon, cfg.mc_runs, cfg.root_seed
    );
    println!(
        "{:<6} {:>14} {:>10} {:>10}",
        "method", "CTTE(T)", "failed", "fallbacks"
    );
    for s in &result.methods {
        let ctte = s.mean.as_ref().map_or(f64::NAN, |m| m.ctte);
        println!(
            "{:<6} {:>14.6e} {:>10} {:>10.2}",
            s.method,
            ctte,
            s.failures.len(),
            s.mean_fallbacks
        );
    }
    for f in &manifest.files {
        println!("wrote {}", out.join(&f.path).display());
    }
    Ok(())
}

fn bench(name: &str, iterations: usize, common: &Common) -> Result<()> {
    let cfg = common.scenario(name)?;
    let row = benchmark_per_iteration(&cfg, iterations)?;
    println!(
        "{:<6} {:<24} {:>12} {:>12} {:>8}",
        "preset", "noise", "OGD [s]", "ONM [s]", "ratio"
    );
    println!(
        "{:<6} {:<24} {:>12.3e} {:>12.3e} {:>8.2}",
        row.scenario, row.noise, row.ogd_seconds, row.onm_seconds, row.ratio
    );
    if let Some(out) = &common.out {
        std::fs::create_dir_all(out).with_context(|| out.display().to_string())?;
        let path = out.join("bench.json");
        let table = TimingTable { rows: vec![row] };
        std::fs::write(&path, serde_json::to_string_pretty(&table)? + "\n")
            .with_context(|| path.display().to_string())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn analyze_cmd(target: &str, runs_per_sigma: usize, common: &Common) -> Result<()> {
    let cfg = common.scenario(target)?;
    let opts = AnalyzeOptions {
        runs_per_sigma,
        ..AnalyzeOptions::default()
    };
    let report = analyze(&cfg, &opts)?;
    let entry = write_analysis(&report, &common.out_dir(&cfg))?;
    let show = |label: &str, r: &toa_core::analysis::ConvexityReport<f64>| {
        println!(
            "{label:<10} Lambda {:.5}  kappa {:+.4e}  mu {:?}  L {:?}  rho {:?}  all conditions: {}",
            r.lambda,
            r.kappa,
            r.mu_hat,
            r.l_hat,
            r.rho,
            r.all_ok()
        );
    };
    show("idealized", &report.idealized);
    if let Some(e) = &report.empirical {
        show("empirical", e);
    }
    for p in &report.scaling.points {
        println!(
            "sigma {:>9.2e}  mean error {:.4e}  ({} failed)",
            p.sigma, p.mean_error, p.failures
        );
    }
    if let Some(fit) = &report.scaling.fit {
        println!(
            "fit: K1 = {:.4}, K2 = {:.4}, R^2 = {:.6}",
            fit.k1, fit.k2, fit.r_squared
        );
    }
    println!("wrote {}", common.out_dir(&cfg).join(entry.path).display());
    Ok(())
}

fn lemmas(seed: u64) -> Result<()> {
    let rep = run_lemmas(seed);
    println!("{}", serde_json::to_string_pretty(&rep)?);
    if !(rep.eig_ok(1e-10) && rep.unit_ok()) {
        bail!("identity checks failed");
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { target, common } => run(target, common),
        Command::Bench {
            preset,
            iterations,
            common,
        } => bench(preset, *iterations, common),
        Command::Analyze {
            target,
            runs_per_sigma,
            common,
        } => analyze_cmd(target, *runs_per_sigma, common),
        Command::Lemmas { seed } => lemmas(*seed),
    }
}
