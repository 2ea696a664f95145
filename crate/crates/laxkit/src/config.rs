//! Optional JSON run configuration; command-line flags take precedence.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::LaxkitError;

/// Environment variable consulted for the seed when neither a flag nor the
/// config file sets one.
pub const SEED_ENV: &str = "LAXKIT_SEED";

/// Every field is optional; unknown keys are rejected.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub family: Option<String>,
    pub rank: Option<usize>,
    pub root: Option<usize>,
    pub dual: Option<bool>,
    pub suite: Option<String>,
    pub n: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub dt: Option<f64>,
    pub scheme: Option<String>,
    pub tau: Option<[f64; 2]>,
    pub omega1: Option<f64>,
    pub sample_every: Option<usize>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub powers: Option<Vec<u32>>,
    pub retries: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, LaxkitError> {
        let text = std::fs::read_to_string(path).map_err(|e| LaxkitError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| LaxkitError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

/// `flag`, else `file`, else `LAXKIT_SEED`, else 0.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, LaxkitError> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| LaxkitError::Usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

/// Picks the flag value over the config value, failing when both are absent.
pub fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, LaxkitError> {
    flag.or(file).ok_or_else(|| LaxkitError::Usage(format!("missing --{name} (flag or config key)")))
}
