//! Per-command JSON configs. Flags override keys of the `--config` file and
//! the merged document is checked against the typed schema before anything runs.

use std::path::{Path, PathBuf};

use photon_fabric::devices::{DeviceGeometry, DeviceKind, InitialDensity};
use photon_fabric::fabric::ArchitectureKind;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Desk,
    Full,
}

impl Scale {
    pub fn geometry(self) -> DeviceGeometry {
        match self {
            Self::Desk => DeviceGeometry::desk(),
            Self::Full => DeviceGeometry::full(),
        }
    }
}

fn default_iterations() -> usize {
    200
}

fn default_jitter() -> f64 {
    0.02
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub device: DeviceKind,
    #[serde(default)]
    pub scale: Scale,
    pub seed: u64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Starting density; a ring for the resonator, uniform gray otherwise.
    #[serde(default)]
    pub init: Option<InitialDensity>,
    /// Half-width of the seeded uniform perturbation added to the start.
    #[serde(default = "default_jitter")]
    pub init_jitter: f64,
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    pub device: DeviceKind,
    #[serde(default)]
    pub scale: Scale,
    pub density: PathBuf,
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

fn default_start() -> f64 {
    1540.0
}

fn default_stop() -> f64 {
    1560.0
}

fn default_step() -> f64 {
    0.02
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub scale: Scale,
    pub density: PathBuf,
    #[serde(default = "default_start")]
    pub start_nm: f64,
    #[serde(default = "default_stop")]
    pub stop_nm: f64,
    #[serde(default = "default_step")]
    pub step_nm: f64,
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub kind: ArchitectureKind,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub colors: Option<usize>,
    /// Resonances (nm) replacing the default palette.
    #[serde(default)]
    pub palette: Option<Vec<f64>>,
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteConfig {
    pub layout: PathBuf,
    pub request: PathBuf,
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub layout: PathBuf,
    pub state: PathBuf,
    /// Device parameter file; nominal values when absent.
    #[serde(default)]
    pub params: Option<PathBuf>,
    #[serde(default = "default_start")]
    pub start_nm: f64,
    #[serde(default = "default_stop")]
    pub stop_nm: f64,
    #[serde(default = "default_sim_step")]
    pub step_nm: f64,
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

fn default_sim_step() -> f64 {
    0.01
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    /// Output directories of earlier optimize or evaluate runs.
    #[serde(default)]
    pub runs: Vec<PathBuf>,
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

/// Merge `overrides` over the `--config` file and check the result.
pub fn load<C: DeserializeOwned>(file: Option<&Path>, overrides: Value) -> Result<C, CliError> {
    let mut doc = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            match serde_json::from_str(&text)? {
                Value::Object(m) => m,
                _ => return Err(CliError::Config(format!("{} must hold a JSON object", path.display()))),
            }
        }
        None => Map::new(),
    };
    if let Value::Object(m) = overrides {
        doc.extend(m.into_iter().filter(|(_, v)| !v.is_null()));
    }
    serde_json::from_value(Value::Object(doc)).map_err(|e| CliError::Config(format!("schema: {e}")))
}

/// Toolkit version and config hash stamped on every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub toolkit: String,
    pub command: String,
    pub config_sha256: String,
}

impl Provenance {
    /// The hash covers the serialized config, which leaves out the output directory.
    pub fn new<C: Serialize>(command: &str, config: &C) -> Self {
        let bytes = serde_json::to_vec(config).expect("configs serialize");
        let digest = Sha256::digest(&bytes);
        Self {
            toolkit: format!("photon-fabric {}", photon_fabric::VERSION),
            command: command.into(),
            config_sha256: format!("{digest:x}"),
        }
    }

    pub fn comments(&self) -> Vec<String> {
        vec![self.toolkit.clone(), format!("command {}", self.command), format!("config_sha256 {}", self.config_sha256)]
    }
}

/// Default seed of an optimization run for `device` in `geom`.
pub fn default_init(device: DeviceKind, geom: &DeviceGeometry) -> InitialDensity {
    match device {
        DeviceKind::Resonator => InitialDensity::Ring {
            radius: 0.225 * geom.region_size,
            width: 0.1 * geom.region_size,
            high: 0.9,
            low: 0.1,
        },
        DeviceKind::Splitter | DeviceKind::Crossover => InitialDensity::Uniform { value: 0.5 },
    }
}
