//! Round-robin assignment of chunks to an ordered endpoint vector.

use std::collections::HashSet;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlacementError {
    #[error("endpoint vector is empty")]
    NoEndpoints,
    #[error("duplicate endpoint id {0:?}")]
    DuplicateEndpoint(String),
    #[error("unknown endpoint id {0:?}")]
    UnknownEndpoint(String),
    #[error("no alternative endpoint: only one endpoint configured")]
    NoAlternative,
    #[error("retry attempt must be at least 1")]
    InvalidAttempt,
    #[error("chunk count must be at least 1")]
    NoChunks,
}

/// Ordered, duplicate-free list of endpoint ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointVector {
    ids: Vec<String>,
}

impl EndpointVector {
    pub fn new<I, S>(ids: I) -> Result<Self, PlacementError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        if ids.is_empty() {
            return Err(PlacementError::NoEndpoints);
        }
        let mut seen = HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(PlacementError::DuplicateEndpoint(id.clone()));
            }
        }
        Ok(EndpointVector { ids })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, position: usize) -> Option<&str> {
        self.ids.get(position).map(String::as_str)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub chunk_index: usize,
    pub endpoint_id: String,
}

/// Chunk index to endpoint mapping; entry `i` is chunk `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementPlan {
    pub assignments: Vec<Assignment>,
}

impl PlacementPlan {
    pub fn endpoint_of(&self, chunk_index: usize) -> Option<&str> {
        self.assignments
            .get(chunk_index)
            .map(|a| a.endpoint_id.as_str())
    }

    /// Chunk indices held by `endpoint_id`, ascending.
    pub fn chunks_on(&self, endpoint_id: &str) -> Vec<usize> {
        self.assignments
            .iter()
            .filter(|a| a.endpoint_id == endpoint_id)
            .map(|a| a.chunk_index)
            .collect()
    }

    /// Chunk count per endpoint, in endpoint-vector order.
    pub fn counts(&self, endpoints: &EndpointVector) -> Vec<usize> {
        endpoints
            .ids()
            .iter()
            .map(|id| self.assignments.iter().filter(|a| &a.endpoint_id == id).count())
            .collect()
    }
}

/// Chunk `i` goes to vector position `i mod s`.
pub fn round_robin(m: usize, endpoints: &EndpointVector) -> Result<PlacementPlan, PlacementError> {
    if m == 0 {
        return Err(PlacementError::NoChunks);
    }
    if endpoints.is_empty() {
        return Err(PlacementError::NoEndpoints);
    }
    let s = endpoints.len();
    Ok(PlacementPlan {
        assignments: (0..m)
            .map(|i| Assignment {
                chunk_index: i,
                endpoint_id: endpoints.ids[i % s].clone(),
            })
            .collect(),
    })
}

/// Endpoint for retry `attempt` (1-based) of a transfer that failed on
/// `failed_endpoint`: the endpoint `attempt` places further along the vector,
/// wrapping around. The original endpoint comes back only after every other
/// one has been tried.
pub fn retry_target(
    failed_endpoint: &str,
    endpoints: &EndpointVector,
    attempt: usize,
) -> Result<String, PlacementError> {
    if attempt == 0 {
        return Err(PlacementError::InvalidAttempt);
    }
    let s = endpoints.len();
    if s <= 1 {
        return Err(PlacementError::NoAlternative);
    }
    let pos = endpoints
        .position(failed_endpoint)
        .ok_or_else(|| PlacementError::UnknownEndpoint(failed_endpoint.to_string()))?;
    Ok(endpoints.ids[(pos + attempt) % s].clone())
}
