//! The built-in tracking scenarios.
//!
//! All share three sensors at (0.5, 0.5), (0, 0.5), (0.5, 0), a random-walk
//! target starting at (2, 1), OGD step size 0.1 and exact initialization.

use toa_core::Method;

use crate::config::{InitMode, NoiseLaw, NoiseSpec, ScenarioConfig, TrajectorySpec};
use crate::error::{HarnessError, Result};

pub const PRESET_NAMES: [&str; 8] = ["A1", "A2", "A3", "B0", "B1", "B2", "C1", "C2"];

pub const DEFAULT_MC_RUNS: usize = 100;

fn base(name: &str, horizon: usize, step_scale: f64, kind: NoiseLaw, level: f64) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        horizon,
        sensors: vec![vec![0.5, 0.5], vec![0.0, 0.5], vec![0.5, 0.0]],
        x1_true: vec![2.0, 1.0],
        trajectory: TrajectorySpec::RandomWalk { step_scale },
        noise: NoiseSpec {
            kind,
            level,
            c0: 3.0,
        },
        methods: vec![Method::Ogd, Method::Onm],
        eta: 0.1,
        init: InitMode::Exact,
        mc_runs: DEFAULT_MC_RUNS,
        root_seed: 0,
        oracle: None,
        analysis: None,
    }
}

/// Looks up a preset by name (case-insensitive).
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    use NoiseLaw::*;
    let cfg = match name.to_ascii_uppercase().as_str() {
        "A1" => base("A1", 500, 0.005, Constant, 1e-4),
        "A2" => base("A2", 500, 0.005, Constant, 0.01),
        "A3" => base("A3", 500, 0.005, InverseSqrt, 0.01),
        "B0" => base("B0", 10_000, 0.005, Constant, 1e-4),
        "B1" => base("B1", 10_000, 0.005, ScaledInverseSqrt, 0.005),
        "B2" => base("B2", 10_000, 0.005, ScaledInverseSqrt, 0.008),
        "C1" => base("C1", 500, 0.1, ScaledInverseSqrt, 0.1),
        "C2" => base("C2", 500, 0.5, ScaledInverseSqrt, 0.001),
        _ => return Err(HarnessError::UnknownPreset(name.to_string())),
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use toa_core::geometry::random_walk_increment;

    #[test]
    fn all_presets_validate() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            assert_eq!(cfg.name, name);
        }
        assert_eq!(preset("a2").unwrap().name, "A2");
        assert!(matches!(preset("D1"), Err(HarnessError::UnknownPreset(_))));
    }

    #[test]
    fn documented_values() {
        let a1 = preset("A1").unwrap();
        assert_eq!(a1.noise.kind, NoiseLaw::Constant);
        assert_eq!(a1.noise.level, 1e-4);
        let c2 = preset("C2").unwrap();
        assert_eq!(
            c2.trajectory,
            TrajectorySpec::RandomWalk { step_scale: 0.5 }
        );
        let b0 = preset("B0").unwrap();
        assert_eq!((b0.horizon, b0.noise), (10_000, a1.noise));
    }

    #[test]
    fn noise_to_variation_ratios() {
        for (name, ratio) in [("B1", 1.0), ("B2", 1.6)] {
            let cfg = preset(name).unwrap();
            let TrajectorySpec::RandomWalk { step_scale } = cfg.trajectory else {
                unreachable!()
            };
            let noise = cfg.noise.schedule().unwrap();
            for t in 1..cfg.horizon {
                let r = noise.sigma(t + 1) / random_walk_increment(step_scale, t);
                assert!((r - ratio).abs() < 1e-12, "{name} t={t}: {r}");
            }
        }
    }
}
