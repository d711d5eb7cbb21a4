//! Run configuration, read from a TOML file such as `torus-spherical.toml`.
//!
//! ```toml
//! precision = 1e-12
//! base_point = [0.137, 0.293]
//!
//! [oracle]
//! lattice_sum_radius = 300
//!
//! [seeds]
//! grid = 7
//! sample = 2047983838
//!
//! [output]
//! format = "json"
//! ```

use crate::error::{Error, Result};
use crate::metric::DEFAULT_SEED;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub lattice_sum_radius: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { lattice_sum_radius: 300 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedsConfig {
    /// Seeds per side for critical-point searches.
    pub grid: usize,
    /// Seed of the sample-point generator.
    pub sample: u64,
}

impl Default for SeedsConfig {
    fn default() -> Self {
        SeedsConfig {
            grid: 7,
            sample: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub precision: f64,
    /// `(r, s)` of the base point `r + sτ` for path integrals and square roots.
    pub base_point: [f64; 2],
    pub oracle: OracleConfig,
    pub seeds: SeedsConfig,
    pub output: OutputConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            precision: 1e-12,
            base_point: [0.137, 0.293],
            oracle: OracleConfig::default(),
            seeds: SeedsConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.precision > 1e-15 && self.precision < 1e-6) {
            return Err(Error::Config(format!(
                "precision {:e} outside (1e-15, 1e-6)",
                self.precision
            )));
        }
        if self.oracle.lattice_sum_radius < 2 {
            return Err(Error::Config("oracle.lattice_sum_radius must be at least 2".into()));
        }
        if self.seeds.grid == 0 {
            return Err(Error::Config("seeds.grid must be positive".into()));
        }
        if !self.base_point.iter().all(|x| x.is_finite()) {
            return Err(Error::Config("base_point must be finite".into()));
        }
        Ok(())
    }
}
