//! Scenario description, loadable from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toa_core::analysis::ConvexityConfig;
use toa_core::{Method, NoiseKind, NoiseSchedule, OracleConfig, SensorArray, Vector};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Start at the true initial position.
    Exact,
    /// Closed-form linear least squares on the first frame.
    Ols,
}

impl std::str::FromStr for InitMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(InitMode::Exact),
            "ols" => Ok(InitMode::Ols),
            other => Err(HarnessError::Config(format!("unknown init `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrajectorySpec {
    RandomWalk { step_scale: f64 },
    Fixed { points: Vec<Vec<f64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseLaw {
    /// `sigma_t = level`
    Constant,
    /// `sigma_t = level / sqrt(t)`
    InverseSqrt,
    /// `sigma_t = level / sqrt(2t)`
    ScaledInverseSqrt,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseLaw,
    pub level: f64,
    #[serde(default = "default_c0")]
    pub c0: f64,
}

fn default_c0() -> f64 {
    3.0
}

impl NoiseSpec {
    pub fn schedule(&self) -> Result<NoiseSchedule<f64>> {
        let kind = match self.kind {
            NoiseLaw::Constant => NoiseKind::Constant { sigma: self.level },
            NoiseLaw::InverseSqrt => NoiseKind::InverseSqrt { c: self.level },
            NoiseLaw::ScaledInverseSqrt => NoiseKind::ScaledInverseSqrt { c: self.level },
        };
        Ok(NoiseSchedule::new(kind, self.c0)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub sensors: Vec<Vec<f64>>,
    pub x1_true: Vec<f64>,
    pub trajectory: TrajectorySpec,
    pub noise: NoiseSpec,
    pub methods: Vec<Method>,
    pub eta: f64,
    pub init: InitMode,
    pub mc_runs: usize,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<ConvexityConfig<f64>>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(HarnessError::Config(format!("{}: {msg}", self.name)));
        if self.horizon == 0 {
            return fail("T must be at least 1");
        }
        if self.mc_runs == 0 {
            return fail("mc_runs must be at least 1");
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return fail("eta must be positive");
        }
        if self.methods.is_empty() {
            return fail("at least one method is required");
        }
        if self
            .methods
            .iter()
            .enumerate()
            .any(|(i, m)| self.methods[..i].contains(m))
        {
            return fail("methods must not repeat");
        }
        let sensors = self.sensor_array()?;
        if self.x1_true.len() != sensors.n() || self.x1_true.iter().any(|c| !c.is_finite()) {
            return fail("x1_true must be a finite point of the sensor dimension");
        }
        match &self.trajectory {
            TrajectorySpec::RandomWalk { step_scale } => {
                if !(*step_scale >= 0.0) || !step_scale.is_finite() {
                    return fail("step_scale must be finite and nonnegative");
                }
            }
            TrajectorySpec::Fixed { points } => {
                if points.len() != self.horizon {
                    return fail("fixed trajectory must have exactly T points");
                }
                if points.iter().any(|p| p.len() != sensors.n()) {
                    return fail("fixed trajectory points must match the sensor dimension");
                }
                if points[0] != self.x1_true {
                    return fail("fixed trajectory must start at x1_true");
                }
            }
        }
        self.noise.schedule()?;
        if let Some(o) = &self.oracle {
            o.validate()?;
        }
        if let Some(a) = &self.analysis {
            a.validate()?;
        }
        Ok(())
    }

    pub fn sensor_array(&self) -> Result<SensorArray<f64>> {
        Ok(SensorArray::from_coords(&self.sensors)?)
    }

    pub fn x1(&self) -> Vector<f64> {
        Vector::from_slice(&self.x1_true)
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|source| HarnessError::Parse {
            path: origin.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }
}
