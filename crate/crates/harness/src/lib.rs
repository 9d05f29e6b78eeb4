//! Scenario harness: presets and TOML configs, Monte Carlo runs, timing,
//! convexity analysis and artifact emission.

// `!(x > 0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyze;
pub mod bench;
pub mod config;
pub mod emit;
pub mod error;
pub mod plot;
pub mod presets;
pub mod simulate;

pub use config::{InitMode, ScenarioConfig};
pub use error::{HarnessError, Result};
pub use presets::preset;
pub use simulate::{run_monte_carlo, run_single, MonteCarloOptions, ScenarioResult};
