//! Endpoint configuration file.
//!
//! ```toml
//! [[endpoint]]
//! id = "se-a"
//! backend = "local-dir"
//! root = "stores/a"          # relative to the config file
//!
//! [[endpoint]]
//! id = "se-b"
//! backend = "simulated"
//! setup_latency = 5.5        # seconds per transfer
//! bandwidth = 16.75e6        # bytes/second, `inf` allowed
//! failure_probability = 0.0
//! rng_seed = 1
//! root = "stores/b"          # optional; in memory when absent
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CostModel, Endpoint, EndpointError, LocalDirEndpoint, SimClock, SimulatedEndpoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case")]
pub enum BackendConfig {
    LocalDir {
        root: PathBuf,
    },
    Simulated {
        setup_latency: f64,
        bandwidth: f64,
        #[serde(default)]
        failure_probability: f64,
        #[serde(default)]
        rng_seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        root: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointDescriptor {
    pub id: String,
    #[serde(flatten)]
    pub backend: BackendConfig,
}

impl EndpointDescriptor {
    pub fn local(id: impl Into<String>, root: impl Into<PathBuf>) -> Self {
        EndpointDescriptor {
            id: id.into(),
            backend: BackendConfig::LocalDir { root: root.into() },
        }
    }

    pub fn simulated(id: impl Into<String>, cost: CostModel, failure_probability: f64, rng_seed: u64) -> Self {
        EndpointDescriptor {
            id: id.into(),
            backend: BackendConfig::Simulated {
                setup_latency: cost.setup_latency,
                bandwidth: cost.bandwidth,
                failure_probability,
                rng_seed,
                root: None,
            },
        }
    }

    pub fn is_simulated(&self) -> bool {
        matches!(self.backend, BackendConfig::Simulated { .. })
    }

    pub fn instantiate(&self, clock: &Arc<SimClock>) -> Result<Arc<dyn Endpoint>, EndpointError> {
        if self.id.is_empty() {
            return Err(EndpointError::Config("endpoint id must not be empty".into()));
        }
        Ok(match &self.backend {
            BackendConfig::LocalDir { root } => Arc::new(LocalDirEndpoint::new(&self.id, root)?),
            BackendConfig::Simulated {
                setup_latency,
                bandwidth,
                failure_probability,
                rng_seed,
                root,
            } => {
                let cost = CostModel::new(*setup_latency, *bandwidth)?;
                let ep = SimulatedEndpoint::new(&self.id, cost, *failure_probability, *rng_seed, Arc::clone(clock))?;
                match root {
                    Some(root) => Arc::new(ep.persisted_at(root)?),
                    None => Arc::new(ep),
                }
            }
        })
    }

    pub(crate) fn resolve_relative(&mut self, base: &Path) {
        let root = match &mut self.backend {
            BackendConfig::LocalDir { root } => Some(root),
            BackendConfig::Simulated { root, .. } => root.as_mut(),
        };
        if let Some(root) = root {
            if root.is_relative() {
                *root = base.join(&*root);
            }
        }
    }
}

/// Contents of an endpoint configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    #[serde(rename = "endpoint")]
    pub endpoints: Vec<EndpointDescriptor>,
}

impl EndpointConfig {
    pub fn parse(text: &str) -> Result<Self, EndpointError> {
        let cfg: EndpointConfig = toml::from_str(text).map_err(|e| EndpointError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file; relative roots are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, EndpointError> {
        let text = fs::read_to_string(path)
            .map_err(|e| EndpointError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut cfg.endpoints {
            d.resolve_relative(base);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EndpointError> {
        if self.endpoints.is_empty() {
            return Err(EndpointError::Config("no endpoints configured".into()));
        }
        let mut seen = HashSet::new();
        for d in &self.endpoints {
            if !seen.insert(d.id.as_str()) {
                return Err(EndpointError::Config(format!("duplicate endpoint id {:?}", d.id)));
            }
            if let BackendConfig::Simulated {
                setup_latency,
                bandwidth,
                failure_probability,
                ..
            } = d.backend
            {
                CostModel::new(setup_latency, bandwidth)?;
                if !(0.0..=1.0).contains(&failure_probability) {
                    return Err(EndpointError::Config(format!(
                        "endpoint {}: failure probability {failure_probability} outside [0, 1]",
                        d.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("endpoint config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[[endpoint]]
id = "A"
backend = "local-dir"
root = "stores/a"

[[endpoint]]
id = "B"
backend = "simulated"
setup_latency = 5.5
bandwidth = inf
failure_probability = 0.25
rng_seed = 9
"#;

    #[test]
    fn parses_both_backends() {
        let cfg = EndpointConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.endpoints.len(), 2);
        assert_eq!(cfg.endpoints[0], EndpointDescriptor::local("A", "stores/a"));
        match &cfg.endpoints[1].backend {
            BackendConfig::Simulated {
                bandwidth,
                failure_probability,
                rng_seed,
                root,
                ..
            } => {
                assert!(bandwidth.is_infinite());
                assert_eq!(*failure_probability, 0.25);
                assert_eq!(*rng_seed, 9);
                assert!(root.is_none());
            }
            other => panic!("{other:?}"),
        }
        let again = EndpointConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn relative_roots_resolve_against_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("endpoints.toml");
        fs::write(&path, SAMPLE).unwrap();
        let cfg = EndpointConfig::load(&path).unwrap();
        assert_eq!(cfg.endpoints[0], EndpointDescriptor::local("A", dir.path().join("stores/a")));
    }

    #[test]
    fn invalid_configs() {
        assert!(EndpointConfig::parse("endpoint = []").is_err());
        let dup = "[[endpoint]]\nid='A'\nbackend='local-dir'\nroot='x'\n[[endpoint]]\nid='A'\nbackend='local-dir'\nroot='y'\n";
        assert!(EndpointConfig::parse(dup).is_err());
        let badp = "[[endpoint]]\nid='A'\nbackend='simulated'\nsetup_latency=1.0\nbandwidth=1.0\nfailure_probability=2.0\n";
        assert!(EndpointConfig::parse(badp).is_err());
        let badbw = "[[endpoint]]\nid='A'\nbackend='simulated'\nsetup_latency=1.0\nbandwidth=0.0\n";
        assert!(EndpointConfig::parse(badbw).is_err());
        let unknown = "[[endpoint]]\nid='A'\nbackend='gridftp'\n";
        assert!(EndpointConfig::parse(unknown).is_err());
    }
}
