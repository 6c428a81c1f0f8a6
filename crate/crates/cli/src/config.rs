use std::fs;
use std::path::{Path, PathBuf};

use ecstore::codec::CodingParams;
use ecstore::endpoint::{EndpointConfig, EndpointDescriptor, CostModel};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_ENV: &str = "ECSTORE_CONFIG";
pub const DEFAULT_CONFIG: &str = "ecstore.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    #[serde(default = "default_split")]
    pub split: usize,
    #[serde(default = "default_coding")]
    pub coding: usize,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default)]
    pub retries: usize,
    /// Virtual encode/decode throughput (bytes/s) when every endpoint is
    /// simulated. Coding is free when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codec_bandwidth: Option<f64>,
}

fn default_split() -> usize {
    10
}
fn default_coding() -> usize {
    5
}
fn default_threads() -> usize {
    1
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            split: default_split(),
            coding: default_coding(),
            threads: default_threads(),
            retries: 0,
            codec_bandwidth: None,
        }
    }
}

/// Contents of `ecstore.toml`. Paths are relative to the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub catalogue: PathBuf,
    pub endpoints: PathBuf,
    #[serde(default)]
    pub defaults: Defaults,
}

impl CliConfig {
    /// Explicit flag, then `ECSTORE_CONFIG`, then `./ecstore.toml`.
    pub fn locate(flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CONFIG))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: CliConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.catalogue, &mut cfg.endpoints] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let d = &self.defaults;
        CodingParams::with_coding(d.split, d.coding)
            .map_err(|e| CliError::Config(format!("default split/coding: {e}")))?;
        if d.threads == 0 {
            return Err(CliError::Config("default threads must be at least 1".into()));
        }
        if let Some(bw) = d.codec_bandwidth {
            if !(bw > 0.0) {
                return Err(CliError::Config(format!("codec_bandwidth must be positive, got {bw}")));
            }
        }
        Ok(())
    }

    pub fn endpoint_config(&self) -> Result<EndpointConfig, CliError> {
        EndpointConfig::load(&self.endpoints).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitBackend {
    Local,
    Simulated,
}

/// Write `ecstore.toml` and `endpoints.toml` into `dir` with `count`
/// endpoints storing under `dir/stores/`.
pub fn write_starter(dir: &Path, count: usize, backend: InitBackend, cost: CostModel) -> Result<PathBuf, CliError> {
    if count == 0 {
        return Err(CliError::Config("need at least one endpoint".into()));
    }
    let config_path = dir.join(DEFAULT_CONFIG);
    if config_path.exists() {
        return Err(CliError::Config(format!("{} already exists", config_path.display())));
    }
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let endpoints: Vec<EndpointDescriptor> = (0..count)
        .map(|i| {
            let id = format!("se{i:02}");
            let root = PathBuf::from("stores").join(&id);
            match backend {
                InitBackend::Local => EndpointDescriptor::local(id, root),
                InitBackend::Simulated => {
                    let mut d = EndpointDescriptor::simulated(id, cost, 0.0, i as u64 + 1);
                    if let ecstore::endpoint::BackendConfig::Simulated { root: r, .. } = &mut d.backend {
                        *r = Some(root);
                    }
                    d
                }
            }
        })
        .collect();
    let endpoint_text = EndpointConfig { endpoints }.to_toml();
    let cfg = CliConfig {
        catalogue: PathBuf::from("catalogue.json"),
        endpoints: PathBuf::from("endpoints.toml"),
        defaults: Defaults::default(),
    };
    let cfg_text = toml::to_string(&cfg).expect("config serializes");
    let write = |p: PathBuf, text: &str| fs::write(&p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())));
    write(dir.join("endpoints.toml"), &endpoint_text)?;
    write(config_path.clone(), &cfg_text)?;
    Ok(config_path)
}
