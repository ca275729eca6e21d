//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wallforge::grid::{DEFAULT_CELLS_PER_UNIT, DEFAULT_HALF_LENGTH};
use wallforge::{SolverOptions, Weight64};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Solve,
    Diagnostics,
    Stability,
    Prop1,
    Sweep,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    #[serde(default)]
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    pub damping: f64,
    pub clamp: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self { max_iterations: o.max_iterations, residual_tolerance: o.residual_tolerance, damping: o.damping, clamp: o.clamp }
    }
}

impl From<&SolverConfig> for SolverOptions {
    fn from(c: &SolverConfig) -> Self {
        SolverOptions {
            max_iterations: c.max_iterations,
            residual_tolerance: c.residual_tolerance,
            damping: c.damping,
            clamp: c.clamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub x0_values: Vec<f64>,
}

fn default_half_length() -> f64 {
    DEFAULT_HALF_LENGTH
}

fn default_cells_per_unit() -> usize {
    DEFAULT_CELLS_PER_UNIT
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("wallforge-output")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub weight: WeightConfig,
    #[serde(default = "default_half_length")]
    pub half_length: f64,
    #[serde(default = "default_cells_per_unit")]
    pub cells_per_unit: usize,
    #[serde(default)]
    pub solver: SolverConfig,
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::ConfigParse(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::ConfigParse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.analyses.is_empty() {
            return Err(CliError::ConfigParse("analyses must not be empty".into()));
        }
        if self.analyses.contains(&Analysis::Sweep) && self.sweep.as_ref().is_none_or(|s| s.x0_values.is_empty()) {
            return Err(CliError::ConfigParse("the sweep analysis needs [sweep] x0_values".into()));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.weight.breakpoints) || !finite(&self.weight.values) || !self.half_length.is_finite() {
            return Err(CliError::ConfigParse("weight and grid parameters must be finite".into()));
        }
        if let Some(s) = &self.sweep {
            if !finite(&s.x0_values) {
                return Err(CliError::ConfigParse("x0_values must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn weight(&self) -> Result<Weight64, CliError> {
        Ok(Weight64::from_segments(self.weight.breakpoints.clone(), self.weight.values.clone())?)
    }

    /// Requested analyses in execution order, with duplicates removed.
    pub fn ordered_analyses(&self) -> Vec<Analysis> {
        let mut a = self.analyses.clone();
        a.sort();
        a.dedup();
        a
    }
}
