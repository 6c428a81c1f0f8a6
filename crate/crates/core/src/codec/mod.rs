//! Systematic Reed-Solomon erasure coding over GF(2^8).
//!
//! A file is zero-padded to a multiple of `k` bytes and cut into `k`
//! contiguous runs of equal length; those are the data chunks. `m - k` coding
//! chunks are computed byte-position-wise from the coding matrix. Any `k` of
//! the `m` chunks reconstruct the file.

mod chunk;
pub mod gf;
mod matrix;

use std::borrow::Borrow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chunk::{
    chunk_filename, format_share_name, parse_chunk_filename, Chunk, ChunkHeader, ChunkName,
    FORMAT_VERSION, HEADER_LEN, SHARE_SUFFIX,
};
pub use gf::{gf_div, gf_inv, gf_mul, GfTables};
pub use matrix::{build_coding_matrix, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("invalid coding parameters k={k}, m={m}: {reason}")]
    InvalidParams { k: usize, m: usize, reason: &'static str },
    #[error("insufficient shares: have {have}, need {need}")]
    InsufficientShares { have: usize, need: usize },
    #[error("chunk format error: {0}")]
    Format(String),
}

/// Data chunk count `k` and total chunk count `m`, with `1 <= k <= m <= 255`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct CodingParams {
    k: usize,
    m: usize,
}

impl CodingParams {
    pub const MAX_CHUNKS: usize = 255;

    pub fn new(k: usize, m: usize) -> Result<Self, CodecError> {
        let reason = if k == 0 {
            "k must be at least 1"
        } else if m < k {
            "m must be at least k"
        } else if m > Self::MAX_CHUNKS {
            "m exceeds the 255 chunks GF(256) can address"
        } else {
            return Ok(CodingParams { k, m });
        };
        Err(CodecError::InvalidParams { k, m, reason })
    }

    /// `k` data chunks plus `coding` extra coding chunks.
    pub fn with_coding(k: usize, coding: usize) -> Result<Self, CodecError> {
        Self::new(k, k.saturating_add(coding))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coding_chunks(&self) -> usize {
        self.m - self.k
    }

    /// Payload length of every chunk for an input of `len` bytes.
    pub fn chunk_len(&self, len: usize) -> usize {
        len.div_ceil(self.k)
    }

    pub fn pad_length(&self, len: usize) -> usize {
        self.chunk_len(len) * self.k - len
    }
}

#[derive(Deserialize)]
struct RawParams {
    k: usize,
    m: usize,
}

impl TryFrom<RawParams> for CodingParams {
    type Error = CodecError;

    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        CodingParams::new(raw.k, raw.m)
    }
}

impl std::fmt::Display for CodingParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}+{}", self.k, self.m - self.k)
    }
}

/// How [`reconstruct`] obtained the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodePath {
    /// All `k` data chunks were present; output is their concatenation.
    Systematic,
    /// `recovered` data chunks were rebuilt through the inverted submatrix.
    Inverted { recovered: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconstruction {
    pub data: Vec<u8>,
    pub path: DecodePath,
}

/// Split `data` into `m` equal-length chunks, the first `k` verbatim.
pub fn encode(data: &[u8], params: CodingParams) -> Result<Vec<Chunk>, CodecError> {
    let (k, m) = (params.k(), params.m());
    let len = params.chunk_len(data.len());
    let pad = params.pad_length(data.len());
    let mut payloads: Vec<Vec<u8>> = (0..k)
        .map(|i| {
            let start = (i * len).min(data.len());
            let end = ((i + 1) * len).min(data.len());
            let mut p = Vec::with_capacity(len);
            p.extend_from_slice(&data[start..end]);
            p.resize(len, 0);
            p
        })
        .collect();
    if m > k {
        let matrix = build_coding_matrix(params)?;
        for r in k..m {
            let mut out = vec![0u8; len];
            for (c, src) in payloads[..k].iter().enumerate() {
                gf::mul_add_slice(&mut out, src, matrix.get(r, c));
            }
            payloads.push(out);
        }
    }
    payloads
        .into_iter()
        .enumerate()
        .map(|(i, payload)| {
            Ok(Chunk {
                header: ChunkHeader::new(params, i, pad as u32)?,
                payload,
            })
        })
        .collect()
}

/// Reconstruct the original bytes from at least `k` chunks with distinct indices.
pub fn decode<C: Borrow<Chunk>>(chunks: &[C]) -> Result<Vec<u8>, CodecError> {
    reconstruct(chunks).map(|r| r.data)
}

/// Like [`decode`], also reporting whether matrix inversion was needed.
///
/// With more than `k` chunks supplied, data chunks are preferred.
pub fn reconstruct<C: Borrow<Chunk>>(chunks: &[C]) -> Result<Reconstruction, CodecError> {
    let first = chunks
        .first()
        .ok_or(CodecError::InsufficientShares { have: 0, need: 1 })?
        .borrow();
    let params = first.header.params;
    let (k, m) = (params.k(), params.m());
    let len = first.payload.len();

    let mut by_index: Vec<Option<&Chunk>> = vec![None; m];
    for c in chunks.iter().map(Borrow::borrow) {
        let h = &c.header;
        if h.params != params || h.pad_length != first.header.pad_length || h.format_version != first.header.format_version {
            return Err(CodecError::Format(format!(
                "chunk {} header disagrees with chunk {}",
                h.chunk_index, first.header.chunk_index
            )));
        }
        if c.payload.len() != len {
            return Err(CodecError::Format(format!(
                "chunk {} payload is {} bytes, expected {len}",
                h.chunk_index,
                c.payload.len()
            )));
        }
        if by_index[h.chunk_index].replace(c).is_some() {
            return Err(CodecError::Format(format!("duplicate chunk index {}", h.chunk_index)));
        }
    }
    let have = by_index.iter().flatten().count();
    if have < k {
        return Err(CodecError::InsufficientShares { have, need: k });
    }
    let pad = first.header.pad_length as usize;
    if pad > k * len {
        return Err(CodecError::Format(format!("pad length {pad} exceeds padded size")));
    }
    let out_len = k * len - pad;

    let missing: Vec<usize> = (0..k).filter(|&i| by_index[i].is_none()).collect();
    if missing.is_empty() {
        let mut data = Vec::with_capacity(k * len);
        for c in by_index.iter().take(k).flatten() {
            data.extend_from_slice(&c.payload);
        }
        data.truncate(out_len);
        return Ok(Reconstruction {
            data,
            path: DecodePath::Systematic,
        });
    }

    // Present data chunks first, then enough coding chunks to reach k rows.
    let present_data = (0..k).filter(|&i| by_index[i].is_some());
    let coding = (k..m).filter(|&i| by_index[i].is_some()).take(missing.len());
    let rows: Vec<usize> = present_data.chain(coding).collect();
    debug_assert_eq!(rows.len(), k);

    let matrix = build_coding_matrix(params)?;
    let decode_matrix = matrix
        .select_rows(&rows)
        .inverse()
        .ok_or_else(|| CodecError::Format("selected coding rows are singular".into()))?;

    let mut data = vec![0u8; k * len];
    for i in 0..k {
        let out = &mut data[i * len..(i + 1) * len];
        match by_index[i] {
            Some(c) => out.copy_from_slice(&c.payload),
            None => {
                for (j, &row) in rows.iter().enumerate() {
                    let src = &by_index[row].expect("row chosen from present chunks").payload;
                    gf::mul_add_slice(out, src, decode_matrix.get(i, j));
                }
            }
        }
    }
    data.truncate(out_len);
    Ok(Reconstruction {
        data,
        path: DecodePath::Inverted {
            recovered: missing.len(),
        },
    })
}
