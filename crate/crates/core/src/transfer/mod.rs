//! Put and get pipelines over a pool of transfer workers.
//!
//! Put: encode locally, place chunks round-robin, upload through the pool,
//! then register the manifest. Get: look up the manifest, fetch data chunks
//! first with coding chunks as fallback, stop dispatching once `k` chunks
//! have arrived, then decode.

mod pipeline;
mod pool;
mod verify;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalogue::CatalogueError;
use crate::codec::{CodecError, CodingParams};
use crate::endpoint::EndpointError;
use crate::placement::PlacementError;

pub use pipeline::{remote_object_name, Pipeline, RemoveReport};
pub use pool::{
    run_pool, Executor, JobError, JobOutcome, PoolControl, PoolOutcome, ThreadExecutor, TimeBase,
    TransferJob, VirtualExecutor, WorkFn,
};
pub use verify::{ChunkHealth, ChunkStatus, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Put,
    Get,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Put => "put",
            Direction::Get => "get",
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a transfer is run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferPolicy {
    /// Worker count; 1 is the serial algorithm.
    pub worker_count: usize,
    /// Extra attempts per chunk after a failure.
    pub max_retries: usize,
    /// Stop dispatching fetches once `k` chunks have arrived.
    pub early_stop: bool,
    /// Queue every chunk for fetching up front instead of `k` with coding
    /// chunks held back as fallback. With enough workers this takes the
    /// fastest `k` of all `m`.
    pub fetch_all: bool,
}

impl Default for TransferPolicy {
    fn default() -> Self {
        TransferPolicy {
            worker_count: 1,
            max_retries: 0,
            early_stop: true,
            fetch_all: false,
        }
    }
}

impl TransferPolicy {
    pub fn new(worker_count: usize, max_retries: usize) -> Result<Self, TransferError> {
        let policy = TransferPolicy {
            worker_count,
            max_retries,
            ..TransferPolicy::default()
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<(), TransferError> {
        if self.worker_count == 0 {
            return Err(TransferError::Policy("worker count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one chunk within a transfer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkReport {
    pub chunk_index: usize,
    pub endpoint_id: String,
    pub object_name: String,
    pub success: bool,
    pub attempts: usize,
    /// Offset of the first attempt from the start of the operation.
    pub started_s: f64,
    pub elapsed_s: f64,
    /// Arrived after enough chunks were already in hand.
    pub discarded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub logical_path: String,
    pub direction: Direction,
    pub params: CodingParams,
    pub size_bytes: u64,
    pub time_base: TimeBase,
    pub threads_used: usize,
    /// Codec time plus pool makespan.
    pub total_s: f64,
    /// Encode (put) or decode (get) time.
    pub codec_s: f64,
    pub transfer_s: f64,
    /// Transfer attempts dispatched, retries included.
    pub dispatched: usize,
    /// Chunks successfully fetched (get) or stored (put).
    pub chunks_fetched: usize,
    /// Data chunks rebuilt through matrix inversion (get only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovered_chunks: Option<usize>,
    /// One entry per chunk, in completion order.
    pub chunks: Vec<ChunkReport>,
}

impl TransferReport {
    /// Mean elapsed time of successful chunk transfers.
    pub fn avg_chunk_s(&self) -> f64 {
        let ok: Vec<f64> = self.chunks.iter().filter(|c| c.success).map(|c| c.elapsed_s).collect();
        if ok.is_empty() {
            0.0
        } else {
            ok.iter().sum::<f64>() / ok.len() as f64
        }
    }

    pub fn max_chunk_s(&self) -> f64 {
        self.chunks.iter().map(|c| c.elapsed_s).fold(0.0, f64::max)
    }

    pub fn failed_chunks(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.chunks.iter().filter(|c| !c.success).map(|c| c.chunk_index).collect();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkFailure {
    pub chunk_index: usize,
    pub endpoint_id: String,
    pub error: String,
}

#[derive(Debug, Error)]
pub enum TransferError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Catalogue(#[from] CatalogueError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Endpoint(#[from] EndpointError),
    #[error("invalid transfer policy: {0}")]
    Policy(String),
    #[error("upload of {path} failed for chunks {chunks:?}")]
    UploadFailed {
        path: String,
        chunks: Vec<usize>,
        failures: Vec<ChunkFailure>,
        report: Box<TransferReport>,
    },
    #[error("download of {path} failed: got {available} of {needed} required chunks")]
    DownloadFailed {
        path: String,
        needed: usize,
        available: usize,
        failures: Vec<ChunkFailure>,
        report: Box<TransferReport>,
    },
    #[error("io error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}
