use serde::{Deserialize, Serialize};

use crate::catalogue::FileManifest;
use crate::codec::{self, Chunk};
use crate::endpoint::{EndpointError, Endpoints};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChunkHealth {
    Healthy,
    Missing,
    Corrupt,
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkStatus {
    pub chunk_index: usize,
    pub endpoint_id: String,
    pub remote_name: String,
    pub health: ChunkHealth,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub logical_path: String,
    pub k: usize,
    pub m: usize,
    pub chunks: Vec<ChunkStatus>,
    pub healthy: usize,
    /// At least `k` healthy chunks remain.
    pub recoverable: bool,
    /// Healthy chunks agree with a re-encode of the decoded file. `None`
    /// when the file is not recoverable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistent: Option<bool>,
}

/// Compare a fetched chunk's header against its manifest.
pub(crate) fn check_chunk(chunk: &Chunk, manifest: &FileManifest, expected_index: usize, expected_len: usize) -> Result<(), String> {
    let h = &chunk.header;
    if h.params != manifest.params {
        return Err(format!("header parameters {} do not match manifest {}", h.params, manifest.params));
    }
    if h.chunk_index != expected_index {
        return Err(format!("header index {} where {expected_index} was expected", h.chunk_index));
    }
    if h.pad_length != manifest.pad_length {
        return Err(format!("header padding {} does not match manifest {}", h.pad_length, manifest.pad_length));
    }
    if chunk.payload.len() != expected_len {
        return Err(format!("payload is {} bytes, expected {expected_len}", chunk.payload.len()));
    }
    Ok(())
}

/// Fetch every chunk of `manifest` and classify it.
pub(crate) fn verify_manifest(manifest: &FileManifest, endpoints: &Endpoints) -> VerifyReport {
    let expected_len = manifest.chunk_len() as usize;
    let mut chunks = Vec::with_capacity(manifest.chunk_locations.len());
    let mut good: Vec<Chunk> = Vec::new();
    for loc in &manifest.chunk_locations {
        let mut lane = endpoints.clock().lane();
        let fetched = endpoints
            .get(&loc.endpoint_id)
            .and_then(|ep| ep.fetch(&mut lane, &loc.remote_name));
        let (health, detail) = match fetched {
            Ok(bytes) => match Chunk::from_bytes(&bytes) {
                Ok(chunk) => match check_chunk(&chunk, manifest, loc.chunk_index, expected_len) {
                    Ok(()) => {
                        good.push(chunk);
                        (ChunkHealth::Healthy, None)
                    }
                    Err(reason) => (ChunkHealth::Corrupt, Some(reason)),
                },
                Err(e) => (ChunkHealth::Corrupt, Some(e.to_string())),
            },
            Err(e @ EndpointError::NotFound { .. }) => (ChunkHealth::Missing, Some(e.to_string())),
            Err(e) => (ChunkHealth::Unreachable, Some(e.to_string())),
        };
        chunks.push(ChunkStatus {
            chunk_index: loc.chunk_index,
            endpoint_id: loc.endpoint_id.clone(),
            remote_name: loc.remote_name.clone(),
            health,
            detail,
        });
    }

    let k = manifest.params.k();
    let recoverable = good.len() >= k;
    let consistent = recoverable.then(|| reencode_matches(&good, manifest, &mut chunks));
    let healthy = chunks.iter().filter(|c| c.health == ChunkHealth::Healthy).count();
    VerifyReport {
        logical_path: manifest.logical_path.clone(),
        k,
        m: manifest.params.m(),
        chunks,
        healthy,
        recoverable: healthy >= k,
        consistent,
    }
}

/// Decode from the healthy chunks, re-encode, and mark any healthy chunk
/// whose payload disagrees as corrupt.
fn reencode_matches(good: &[Chunk], manifest: &FileManifest, statuses: &mut [ChunkStatus]) -> bool {
    let Ok(rec) = codec::reconstruct(good) else {
        return false;
    };
    if rec.data.len() as u64 != manifest.original_size {
        return false;
    }
    let Ok(fresh) = codec::encode(&rec.data, manifest.params) else {
        return false;
    };
    let mut all_match = true;
    for chunk in good {
        if fresh[chunk.index()].payload != chunk.payload {
            all_match = false;
            if let Some(s) = statuses.iter_mut().find(|s| s.chunk_index == chunk.index()) {
                s.health = ChunkHealth::Corrupt;
                s.detail = Some("payload disagrees with the other chunks".into());
            }
        }
    }
    all_match
}
