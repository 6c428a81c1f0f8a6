//! Storage endpoints treated as whole-object archives.
//!
//! Two backends: [`LocalDirEndpoint`] keeps objects as files in a directory,
//! [`SimulatedEndpoint`] charges virtual time per transfer from a
//! [`CostModel`] and fails transfers at random with a seeded generator.

mod clock;
mod config;
mod local;
mod simulated;

use std::collections::HashMap;
use std::fmt;
use std::io;
use std::sync::Arc;

use thiserror::Error;

pub use clock::{Lane, SimClock};
pub use config::{BackendConfig, EndpointConfig, EndpointDescriptor};
pub use local::LocalDirEndpoint;
pub use simulated::{CostModel, SimulatedEndpoint};

use crate::placement::{EndpointVector, PlacementError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EndpointError {
    #[error("transfer of {object:?} on endpoint {endpoint} failed")]
    TransferFailed { endpoint: String, object: String },
    #[error("object {object:?} not found on endpoint {endpoint}")]
    NotFound { endpoint: String, object: String },
    #[error("io error on endpoint {endpoint}, object {object:?}: {message}")]
    Io {
        endpoint: String,
        object: String,
        message: String,
    },
    #[error("invalid object name {object:?} for endpoint {endpoint}")]
    InvalidName { endpoint: String, object: String },
    #[error("endpoint configuration error: {0}")]
    Config(String),
    #[error("unknown endpoint {0:?}")]
    UnknownEndpoint(String),
}

impl EndpointError {
    pub(crate) fn io(endpoint: &str, object: &str, e: &io::Error) -> Self {
        EndpointError::Io {
            endpoint: endpoint.to_string(),
            object: object.to_string(),
            message: e.to_string(),
        }
    }
}

/// Object names are flat: non-empty, no separators, not hidden.
pub(crate) fn check_object_name(endpoint: &str, object: &str) -> Result<(), EndpointError> {
    let bad = object.is_empty()
        || object.starts_with('.')
        || object.contains('/')
        || object.contains('\\')
        || object.contains('\0');
    if bad {
        return Err(EndpointError::InvalidName {
            endpoint: endpoint.to_string(),
            object: object.to_string(),
        });
    }
    Ok(())
}

/// Whole-object put/get storage.
///
/// Transfers run on a [`Lane`]; simulated backends charge their cost to it,
/// real backends ignore it. `store` is atomic: a failed store leaves no object.
pub trait Endpoint: Send + Sync + fmt::Debug {
    fn id(&self) -> &str;
    fn store(&self, lane: &mut Lane, object: &str, data: &[u8]) -> Result<u64, EndpointError>;
    fn fetch(&self, lane: &mut Lane, object: &str) -> Result<Vec<u8>, EndpointError>;
    fn delete(&self, object: &str) -> Result<(), EndpointError>;
    fn exists(&self, object: &str) -> Result<bool, EndpointError>;
    /// Names of all stored objects, sorted.
    fn objects(&self) -> Result<Vec<String>, EndpointError>;
    /// Virtual seconds to move `size` bytes, for simulated backends.
    fn simulated_cost(&self, _size: u64) -> Option<f64> {
        None
    }
    fn is_simulated(&self) -> bool {
        self.simulated_cost(0).is_some()
    }
}

/// The configured endpoints in vector order, with the clock they share.
#[derive(Debug, Clone)]
pub struct Endpoints {
    list: Vec<Arc<dyn Endpoint>>,
    index: HashMap<String, usize>,
    vector: EndpointVector,
    clock: Arc<SimClock>,
}

impl Endpoints {
    pub fn new(list: Vec<Arc<dyn Endpoint>>, clock: Arc<SimClock>) -> Result<Self, EndpointError> {
        let vector = EndpointVector::new(list.iter().map(|e| e.id().to_string())).map_err(|e| match e {
            PlacementError::NoEndpoints => EndpointError::Config("no endpoints configured".into()),
            other => EndpointError::Config(other.to_string()),
        })?;
        let index = list
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id().to_string(), i))
            .collect();
        Ok(Endpoints {
            list,
            index,
            vector,
            clock,
        })
    }

    /// Instantiate descriptors against one shared clock.
    pub fn from_descriptors(descriptors: &[EndpointDescriptor], clock: Arc<SimClock>) -> Result<Self, EndpointError> {
        let list = descriptors
            .iter()
            .map(|d| d.instantiate(&clock))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(list, clock)
    }

    pub fn get(&self, id: &str) -> Result<&Arc<dyn Endpoint>, EndpointError> {
        self.index
            .get(id)
            .map(|&i| &self.list[i])
            .ok_or_else(|| EndpointError::UnknownEndpoint(id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn Endpoint>> {
        self.list.iter()
    }

    pub fn vector(&self) -> &EndpointVector {
        &self.vector
    }

    pub fn clock(&self) -> &Arc<SimClock> {
        &self.clock
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn all_simulated(&self) -> bool {
        self.list.iter().all(|e| e.is_simulated())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(id: &str, latency: f64, bw: f64, p: f64, clock: &Arc<SimClock>) -> SimulatedEndpoint {
        SimulatedEndpoint::new(id, CostModel::new(latency, bw).unwrap(), p, 7, Arc::clone(clock)).unwrap()
    }

    #[test]
    fn local_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let ep = LocalDirEndpoint::new("L", dir.path().join("root")).unwrap();
        let clock = SimClock::new();
        let mut lane = clock.lane();
        assert_eq!(ep.store(&mut lane, "obj", b"hello").unwrap(), 5);
        assert_eq!(ep.fetch(&mut lane, "obj").unwrap(), b"hello");
        assert!(ep.exists("obj").unwrap());
        assert_eq!(ep.objects().unwrap(), vec!["obj"]);
        assert!(matches!(ep.fetch(&mut lane, "nope"), Err(EndpointError::NotFound { .. })));
        ep.delete("obj").unwrap();
        assert!(!ep.exists("obj").unwrap());
        assert!(matches!(ep.delete("obj"), Err(EndpointError::NotFound { .. })));
        assert!(matches!(ep.store(&mut lane, "../x", b""), Err(EndpointError::InvalidName { .. })));
        assert!(matches!(ep.store(&mut lane, ".hidden", b""), Err(EndpointError::InvalidName { .. })));
        assert_eq!(clock.now(), 0.0);
    }

    #[test]
    fn simulated_roundtrip_and_cost() {
        let clock = SimClock::new();
        let ep = sim("S", 5.5, f64::INFINITY, 0.0, &clock);
        let mut lane = clock.lane();
        let data = vec![7u8; 75_600];
        ep.store(&mut lane, "c0", &data).unwrap();
        assert_eq!(clock.now(), 5.5);
        assert_eq!(ep.fetch(&mut lane, "c0").unwrap(), data);
        assert_eq!(clock.now(), 11.0);
        assert!(matches!(ep.fetch(&mut lane, "zz"), Err(EndpointError::NotFound { .. })));
        ep.delete("c0").unwrap();
        assert!(!ep.exists("c0").unwrap());
    }

    #[test]
    fn simulated_cost_formula() {
        let clock = SimClock::new();
        let ep = sim("S", 5.5, 17.5e6, 0.0, &clock);
        assert_eq!(ep.simulated_cost(0), Some(5.5));
        let small = ep.simulated_cost(756_000).unwrap();
        assert!((small - (5.5 + 756_000.0 / 17.5e6)).abs() < 1e-12);
        assert!((small - 5.543).abs() < 0.001);
        let big = ep.simulated_cost(2_400_000_000).unwrap();
        assert!(5.5 / big < 0.05, "setup should be negligible for large objects");
        let mut lane = clock.lane();
        ep.store(&mut lane, "x", &vec![0; 756_000]).unwrap();
        assert_eq!(clock.now(), small);
    }

    #[test]
    fn failed_store_leaves_nothing_and_still_costs() {
        let clock = SimClock::new();
        let ep = sim("F", 2.0, 1e6, 1.0, &clock);
        let mut lane = clock.lane();
        assert!(matches!(ep.store(&mut lane, "a", &[0; 1000]), Err(EndpointError::TransferFailed { .. })));
        assert!(!ep.exists("a").unwrap());
        assert!(ep.objects().unwrap().is_empty());
        assert!((clock.now() - 2.001).abs() < 1e-12);
    }

    #[test]
    fn failure_sequence_is_seeded() {
        let run = || {
            let clock = SimClock::new();
            let ep = sim("R", 1.0, 1e9, 0.3, &clock);
            let mut lane = clock.lane();
            let outcomes: Vec<bool> = (0..200).map(|i| ep.store(&mut lane, &format!("o{i}"), b"x").is_ok()).collect();
            (outcomes, clock.now())
        };
        let (a, ta) = run();
        let (b, tb) = run();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        let failures = a.iter().filter(|ok| !**ok).count();
        assert!((30..=90).contains(&failures), "{failures} failures at p=0.3");
    }

    #[test]
    fn serial_cost_is_additive() {
        let clock = SimClock::new();
        let ep = sim("A", 0.5, 1000.0, 0.5, &clock);
        let mut lane = clock.lane();
        let mut expected = 0.0;
        for i in 0..50 {
            let size = 100 + i * 10;
            let _ = ep.store(&mut lane, &format!("o{i}"), &vec![1; size]);
            expected += ep.simulated_cost(size as u64).unwrap();
        }
        assert!((clock.now() - expected).abs() < 1e-9);
    }

    #[test]
    fn persisted_simulated_storage() {
        let dir = tempfile::tempdir().unwrap();
        let clock = SimClock::new();
        {
            let ep = sim("P", 1.0, 1e6, 0.0, &clock).persisted_at(dir.path()).unwrap();
            ep.store(&mut clock.lane(), "keep", b"data").unwrap();
        }
        let ep = sim("P", 1.0, 1e6, 0.0, &clock).persisted_at(dir.path()).unwrap();
        assert_eq!(ep.fetch(&mut clock.lane(), "keep").unwrap(), b"data");
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(CostModel::new(-1.0, 1.0).is_err());
        assert!(CostModel::new(1.0, 0.0).is_err());
        assert!(CostModel::new(1.0, f64::NAN).is_err());
        assert!(CostModel::new(0.0, f64::INFINITY).is_ok());
        let clock = SimClock::new();
        assert!(SimulatedEndpoint::new("x", CostModel::new(0.0, 1.0).unwrap(), 1.5, 0, clock).is_err());
    }

    #[test]
    fn registry_rejects_duplicates() {
        let clock = SimClock::new();
        let a: Arc<dyn Endpoint> = Arc::new(sim("A", 0.0, 1.0, 0.0, &clock));
        let a2: Arc<dyn Endpoint> = Arc::new(sim("A", 0.0, 1.0, 0.0, &clock));
        assert!(Endpoints::new(vec![a.clone(), a2], clock.clone()).is_err());
        assert!(Endpoints::new(vec![], clock.clone()).is_err());
        let eps = Endpoints::new(vec![a], clock).unwrap();
        assert!(eps.get("A").is_ok());
        assert!(matches!(eps.get("B"), Err(EndpointError::UnknownEndpoint(_))));
        assert!(eps.all_simulated());
    }
}
