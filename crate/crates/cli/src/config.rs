//! Versioned JSON run configuration.

use std::path::{Path, PathBuf};

use dirlab::cantor::CantorSpec;
use dirlab::disk::DiskGridParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    /// Cantor set; the middle-thirds set when absent.
    #[serde(default)]
    pub set: Option<CantorSpec<f64>>,
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub resolution: Resolution,
    /// `δ`-ladder for the cyclicity campaign.
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub outer: OuterOptions,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub circle_n: Option<usize>,
    pub disk: Option<DiskGridParams>,
    /// Depth `N` of the level `E_N` used for boundary data.
    pub depth: Option<usize>,
    pub psi_depth: Option<usize>,
    pub capacity_depth: Option<usize>,
    pub samples_per_decade: Option<usize>,
    pub oversample: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuterOptions {
    /// Exponent `β` of the weight `w(t) = t^β`.
    pub weight_power: Option<f64>,
    /// `theta,logmod` CSV used instead of a weight.
    pub modulus_csv: Option<PathBuf>,
    /// Clipping floor for `-inf` entries of `modulus_csv`.
    pub floor: Option<f64>,
}

pub fn load(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let cfg: Config =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(CliError::Usage(format!(
            "{}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
            path.display(),
            cfg.schema_version
        )));
    }
    Ok(cfg)
}

impl Config {
    pub fn new() -> Self {
        Self { schema_version: SCHEMA_VERSION, ..Self::default() }
    }
}
