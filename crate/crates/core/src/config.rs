//! Run configuration for the CLI, mirrored one-to-one by the JSON config
//! file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_map::FeatureMap;

/// Hard cap on the feature dimension: the witness solve is O(m³).
pub const MAX_FEATURE_DIM: usize = 4096;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FeatureMapConfig {
    pub d: usize,
    pub m: usize,
    pub bandwidth: f64,
    pub window_scale: f64,
    pub seed: u64,
}

impl Default for FeatureMapConfig {
    fn default() -> Self {
        FeatureMapConfig {
            d: 1,
            m: 64,
            bandwidth: 1.0,
            window_scale: 10.0,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    #[serde(default)]
    pub feature_map: FeatureMapConfig,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_top_k")]
    pub top_k_directions: usize,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default = "default_grid_resolution")]
    pub grid_resolution: usize,
}

fn default_lambda_grid() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1]
}

fn default_top_k() -> usize {
    10
}

fn default_grid_resolution() -> usize {
    10_001
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            feature_map: FeatureMapConfig::default(),
            lambda_grid: default_lambda_grid(),
            top_k_directions: default_top_k(),
            output_path: None,
            grid_resolution: default_grid_resolution(),
        }
    }
}

impl RunConfig {
    /// Default configuration with the feature map matched to data of
    /// dimension `d`.
    pub fn default_for_dim(d: usize) -> Self {
        let mut config = RunConfig::default();
        config.feature_map.d = d;
        config
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fm = &self.feature_map;
        if fm.d == 0 || fm.m == 0 {
            return Err(Error::InvalidParameter(
                "feature map dimensions must be positive".into(),
            ));
        }
        if fm.m > MAX_FEATURE_DIM {
            return Err(Error::InvalidParameter(format!(
                "m = {} exceeds the configured cap {MAX_FEATURE_DIM}",
                fm.m
            )));
        }
        if !(fm.bandwidth.is_finite() && fm.bandwidth > 0.0)
            || !(fm.window_scale.is_finite() && fm.window_scale > 0.0)
        {
            return Err(Error::InvalidParameter(
                "bandwidth and window_scale must be positive and finite".into(),
            ));
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::InvalidParameter("lambda_grid must be nonempty".into()));
        }
        if self
            .lambda_grid
            .iter()
            .any(|&l| !(l.is_finite() && l >= 0.0))
        {
            return Err(Error::InvalidParameter(
                "lambda_grid entries must be nonnegative and finite".into(),
            ));
        }
        if self.lambda_grid.contains(&0.0) {
            return Err(Error::InvalidParameter(
                "lambda = 0 is opt-in via the --lambda flag, not the grid".into(),
            ));
        }
        if self.lambda_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter(
                "lambda_grid must be sorted ascending".into(),
            ));
        }
        if self.top_k_directions == 0 {
            return Err(Error::InvalidParameter(
                "top_k_directions must be positive".into(),
            ));
        }
        if self.grid_resolution < 2 {
            return Err(Error::InvalidParameter(
                "grid_resolution must be at least 2".into(),
            ));
        }
        Ok(())
    }

    pub fn build_feature_map(&self) -> Result<FeatureMap> {
        let fm = &self.feature_map;
        FeatureMap::new(fm.d, fm.m, fm.bandwidth, fm.window_scale, fm.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let config = RunConfig::default();
        config.validate().unwrap();
        assert_eq!(config.lambda_grid, vec![1e-3, 1e-2, 1e-1]);
        assert_eq!(config.top_k_directions, 10);
        assert_eq!(config.grid_resolution, 10_001);
    }

    #[test]
    fn validation_catches_bad_grids() {
        let mut config = RunConfig {
            lambda_grid: vec![],
            ..RunConfig::default()
        };
        assert!(config.validate().is_err());

        config.lambda_grid = vec![1e-1, 1e-3];
        assert!(config.validate().is_err());

        config.lambda_grid = vec![0.0, 1e-3];
        assert!(config.validate().is_err());

        config.lambda_grid = vec![1e-3, 1e-1];
        config.feature_map.m = MAX_FEATURE_DIM + 1;
        assert!(config.validate().is_err());
    }

    #[test]
    fn partial_json_uses_defaults() {
        let parsed: RunConfig =
            serde_json::from_str(r#"{"feature_map": {"d": 2, "m": 32, "bandwidth": 0.5, "window_scale": 5.0, "seed": 7}}"#)
                .unwrap();
        assert_eq!(parsed.feature_map.d, 2);
        assert_eq!(parsed.lambda_grid, vec![1e-3, 1e-2, 1e-1]);
    }
}
