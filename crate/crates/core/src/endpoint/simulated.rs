use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::local::LocalDirEndpoint;
use super::{check_object_name, Endpoint, EndpointError, Lane, SimClock};

/// Affine transfer cost: fixed channel setup plus size over bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub setup_latency: f64,
    /// Bytes per second; may be `f64::INFINITY`.
    pub bandwidth: f64,
}

impl CostModel {
    pub fn new(setup_latency: f64, bandwidth: f64) -> Result<Self, EndpointError> {
        if !(setup_latency >= 0.0 && setup_latency.is_finite()) {
            return Err(EndpointError::Config(format!(
                "setup latency must be finite and >= 0, got {setup_latency}"
            )));
        }
        if !(bandwidth > 0.0) {
            return Err(EndpointError::Config(format!("bandwidth must be > 0, got {bandwidth}")));
        }
        Ok(CostModel {
            setup_latency,
            bandwidth,
        })
    }

    /// Seconds to move `size` bytes.
    pub fn cost(&self, size: u64) -> f64 {
        self.setup_latency + size as f64 / self.bandwidth
    }
}

#[derive(Debug)]
enum Storage {
    Memory(Mutex<BTreeMap<String, Vec<u8>>>),
    Dir(LocalDirEndpoint),
}

/// Endpoint whose transfers cost virtual time and fail with a fixed
/// per-operation probability drawn from a seeded generator.
#[derive(Debug)]
pub struct SimulatedEndpoint {
    id: String,
    cost: CostModel,
    failure_probability: f64,
    rng: Mutex<ChaCha8Rng>,
    clock: Arc<SimClock>,
    storage: Storage,
}

impl SimulatedEndpoint {
    pub fn new(
        id: impl Into<String>,
        cost: CostModel,
        failure_probability: f64,
        rng_seed: u64,
        clock: Arc<SimClock>,
    ) -> Result<Self, EndpointError> {
        if !(0.0..=1.0).contains(&failure_probability) {
            return Err(EndpointError::Config(format!(
                "failure probability must lie in [0, 1], got {failure_probability}"
            )));
        }
        Ok(SimulatedEndpoint {
            id: id.into(),
            cost,
            failure_probability,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(rng_seed)),
            clock,
            storage: Storage::Memory(Mutex::new(BTreeMap::new())),
        })
    }

    /// Keep objects as files under `root` instead of in memory, so they
    /// outlive the process.
    pub fn persisted_at(mut self, root: impl Into<PathBuf>) -> Result<Self, EndpointError> {
        self.storage = Storage::Dir(LocalDirEndpoint::new(self.id.clone(), root)?);
        Ok(self)
    }

    pub fn cost_model(&self) -> CostModel {
        self.cost
    }

    pub fn failure_probability(&self) -> f64 {
        self.failure_probability
    }

    pub fn clock(&self) -> &Arc<SimClock> {
        &self.clock
    }

    fn charge(&self, lane: &mut Lane, real_size: u64) {
        lane.charge(self.cost.cost(self.clock.scaled(real_size)));
    }

    /// One uniform draw in [0, 1) per transfer attempt.
    fn draw_failure(&self) -> bool {
        let mut rng = self.rng.lock().expect("rng lock poisoned");
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        u < self.failure_probability
    }

    fn failed(&self, object: &str) -> EndpointError {
        EndpointError::TransferFailed {
            endpoint: self.id.clone(),
            object: object.to_string(),
        }
    }

    fn size_of(&self, object: &str) -> Result<Option<u64>, EndpointError> {
        match &self.storage {
            Storage::Memory(map) => Ok(map
                .lock()
                .expect("storage lock poisoned")
                .get(object)
                .map(|v| v.len() as u64)),
            Storage::Dir(dir) => dir.size_of(object),
        }
    }
}

impl Endpoint for SimulatedEndpoint {
    fn id(&self) -> &str {
        &self.id
    }

    fn store(&self, lane: &mut Lane, object: &str, data: &[u8]) -> Result<u64, EndpointError> {
        check_object_name(&self.id, object)?;
        let fail = self.draw_failure();
        self.charge(lane, data.len() as u64);
        if fail {
            return Err(self.failed(object));
        }
        match &self.storage {
            Storage::Memory(map) => {
                map.lock()
                    .expect("storage lock poisoned")
                    .insert(object.to_string(), data.to_vec());
                Ok(data.len() as u64)
            }
            Storage::Dir(dir) => dir.write_atomic(object, data),
        }
    }

    fn fetch(&self, lane: &mut Lane, object: &str) -> Result<Vec<u8>, EndpointError> {
        check_object_name(&self.id, object)?;
        let fail = self.draw_failure();
        let Some(size) = self.size_of(object)? else {
            self.charge(lane, 0);
            return Err(EndpointError::NotFound {
                endpoint: self.id.clone(),
                object: object.to_string(),
            });
        };
        self.charge(lane, size);
        if fail {
            return Err(self.failed(object));
        }
        match &self.storage {
            Storage::Memory(map) => map
                .lock()
                .expect("storage lock poisoned")
                .get(object)
                .cloned()
                .ok_or_else(|| EndpointError::NotFound {
                    endpoint: self.id.clone(),
                    object: object.to_string(),
                }),
            Storage::Dir(dir) => dir.read(object),
        }
    }

    fn delete(&self, object: &str) -> Result<(), EndpointError> {
        check_object_name(&self.id, object)?;
        match &self.storage {
            Storage::Memory(map) => map
                .lock()
                .expect("storage lock poisoned")
                .remove(object)
                .map(|_| ())
                .ok_or_else(|| EndpointError::NotFound {
                    endpoint: self.id.clone(),
                    object: object.to_string(),
                }),
            Storage::Dir(dir) => dir.delete(object),
        }
    }

    fn exists(&self, object: &str) -> Result<bool, EndpointError> {
        check_object_name(&self.id, object)?;
        Ok(self.size_of(object)?.is_some())
    }

    fn objects(&self) -> Result<Vec<String>, EndpointError> {
        match &self.storage {
            Storage::Memory(map) => Ok(map.lock().expect("storage lock poisoned").keys().cloned().collect()),
            Storage::Dir(dir) => dir.objects(),
        }
    }

    fn simulated_cost(&self, size: u64) -> Option<f64> {
        Some(self.cost.cost(self.clock.scaled(size)))
    }
}
