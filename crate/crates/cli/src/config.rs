//! The optional TOML config file. Its keys mirror the long flags
//! (snake_case); values on the command line override it. Unknown keys are
//! ignored, which lets a run manifest double as a config file.

use std::path::{Path, PathBuf};

use qdse_core::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default)]
pub struct FileConfig {
    // Global
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    // Data source
    pub data_dir: Option<PathBuf>,
    pub synthetic: Option<usize>,
    pub limit: Option<usize>,
    // Training
    pub precision: Option<String>,
    pub scale: Option<f64>,
    pub topology: Option<String>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub act: Option<String>,
    pub bn_order: Option<String>,
    pub lr: Option<f64>,
    pub lr_decay: Option<f64>,
    // Evaluation
    pub checkpoint: Option<PathBuf>,
    // Estimation
    pub all_precisions: Option<bool>,
    pub delta: Option<f64>,
    pub cost_mode: Option<String>,
    pub device_file: Option<PathBuf>,
    pub bandwidth: Option<f64>,
    // Exploration / pareto / plot
    pub precisions: Option<Vec<String>>,
    pub scales: Option<Vec<f64>>,
    pub train_policy: Option<String>,
    pub objectives: Option<Vec<String>>,
    pub input: Option<PathBuf>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidArgument(format!("cannot read config file {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| Error::DataFormat(format!("config file {}: {e}", path.display())))
    }
}

/// First of flag value, config-file value, default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Like [`pick`] but the setting may stay absent.
pub fn pick_opt<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}
