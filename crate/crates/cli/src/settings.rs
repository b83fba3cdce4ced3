//! Option resolution: command-line flags, then the JSON config file, then defaults.

use crate::error::CliError;
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Values accepted in a `--config` JSON file. Keys mirror the long flag names with `_` for `-`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub data: Option<PathBuf>,
    pub response: Option<String>,
    pub covariates: Option<Vec<String>>,
    pub standardize: Option<Vec<String>>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub batch: Option<usize>,
    pub seed: Option<u64>,
    pub hidden: Option<Vec<usize>>,
    #[serde(alias = "bootstrap-B", alias = "bootstrap_B")]
    pub bootstrap_b: Option<usize>,
    #[serde(alias = "bootstrap-mode")]
    pub bootstrap_mode: Option<String>,
    pub folds: Option<usize>,
    pub bins: Option<usize>,
    pub level: Option<f64>,
    pub out: Option<PathBuf>,
    pub fit: Option<PathBuf>,
    pub coefficients: Option<PathBuf>,
    pub bootstrap: Option<PathBuf>,
    pub ci: Option<PathBuf>,
    pub scheme: Option<u32>,
    pub n: Option<usize>,
    pub threads: Option<usize>,
    pub quiet: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// First present value among flag and config.
pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Like [`pick`] but required; `name` is the flag used in the error message.
pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, CliError> {
    pick(flag, file).ok_or_else(|| CliError::Usage(format!("missing required option --{name}")))
}
