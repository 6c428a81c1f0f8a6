//! Chunk header layout and share file naming.
//!
//! On-disk layout of one chunk object:
//!
//! ```text
//! offset  size  field
//! 0       1     format_version (currently 1)
//! 1       1     k   data chunks
//! 2       1     m   total chunks
//! 3       1     chunk_index (0-based, < m)
//! 4       4     pad_length, big-endian
//! 8       ..    payload
//! ```

use super::{CodecError, CodingParams};

pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 8;
pub const SHARE_SUFFIX: &str = ".fec";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChunkHeader {
    pub format_version: u8,
    pub params: CodingParams,
    pub chunk_index: usize,
    pub pad_length: u32,
}

impl ChunkHeader {
    pub fn new(params: CodingParams, chunk_index: usize, pad_length: u32) -> Result<Self, CodecError> {
        let header = ChunkHeader {
            format_version: FORMAT_VERSION,
            params,
            chunk_index,
            pad_length,
        };
        header.validate()?;
        Ok(header)
    }

    fn validate(&self) -> Result<(), CodecError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CodecError::Format(format!(
                "unsupported chunk format version {}",
                self.format_version
            )));
        }
        if self.chunk_index >= self.params.m() {
            return Err(CodecError::Format(format!(
                "chunk index {} out of range for m={}",
                self.chunk_index,
                self.params.m()
            )));
        }
        if self.pad_length as usize >= self.params.k() && self.pad_length != 0 {
            return Err(CodecError::Format(format!(
                "pad length {} not below k={}",
                self.pad_length,
                self.params.k()
            )));
        }
        Ok(())
    }

    pub fn is_data(&self) -> bool {
        self.chunk_index < self.params.k()
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0] = self.format_version;
        out[1] = self.params.k() as u8;
        out[2] = self.params.m() as u8;
        out[3] = self.chunk_index as u8;
        out[4..8].copy_from_slice(&self.pad_length.to_be_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() < HEADER_LEN {
            return Err(CodecError::Format(format!(
                "chunk header truncated: {} of {HEADER_LEN} bytes",
                bytes.len()
            )));
        }
        let params = CodingParams::new(bytes[1] as usize, bytes[2] as usize)
            .map_err(|e| CodecError::Format(format!("bad coding parameters in header: {e}")))?;
        let header = ChunkHeader {
            format_version: bytes[0],
            params,
            chunk_index: bytes[3] as usize,
            pad_length: u32::from_be_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]),
        };
        header.validate()?;
        Ok(header)
    }
}

/// One share of an encoded file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub header: ChunkHeader,
    pub payload: Vec<u8>,
}

impl Chunk {
    pub fn index(&self) -> usize {
        self.header.chunk_index
    }

    /// Header followed by payload.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&self.header.to_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let header = ChunkHeader::parse(bytes)?;
        Ok(Chunk {
            header,
            payload: bytes[HEADER_LEN..].to_vec(),
        })
    }
}

/// Parsed form of a share file name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChunkName {
    pub base: String,
    pub chunk_index: usize,
    pub total: usize,
}

/// zfec-style share name: `<base>.<index>_<m>.fec`, with the index
/// zero-padded to as many digits as `m` has (`data.bin.03_15.fec`).
pub fn chunk_filename(base: &str, header: &ChunkHeader) -> Result<String, CodecError> {
    format_share_name(base, header.chunk_index, header.params.m())
}

pub fn format_share_name(base: &str, index: usize, total: usize) -> Result<String, CodecError> {
    if base.is_empty() || base.contains('/') || base.contains('\\') {
        return Err(CodecError::Format(format!("invalid share base name {base:?}")));
    }
    if index >= total || total > CodingParams::MAX_CHUNKS {
        return Err(CodecError::Format(format!(
            "share index {index} invalid for {total} chunks"
        )));
    }
    let width = total.to_string().len();
    Ok(format!("{base}.{index:0width$}_{total}{SHARE_SUFFIX}"))
}

/// Inverse of [`chunk_filename`]. Only the canonical zero-padded form is accepted.
pub fn parse_chunk_filename(name: &str) -> Result<ChunkName, CodecError> {
    let bad = || CodecError::Format(format!("not a share file name: {name:?}"));
    let stem = name.strip_suffix(SHARE_SUFFIX).ok_or_else(bad)?;
    let (base, tag) = stem.rsplit_once('.').ok_or_else(bad)?;
    let (idx, total) = tag.split_once('_').ok_or_else(bad)?;
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if base.is_empty() || !all_digits(idx) || !all_digits(total) {
        return Err(bad());
    }
    let chunk_index: usize = idx.parse().map_err(|_| bad())?;
    let total_n: usize = total.parse().map_err(|_| bad())?;
    let canonical = format_share_name(base, chunk_index, total_n).map_err(|_| bad())?;
    if canonical != name {
        return Err(bad());
    }
    Ok(ChunkName {
        base: base.to_string(),
        chunk_index,
        total: total_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn header(k: usize, m: usize, idx: usize, pad: u32) -> ChunkHeader {
        ChunkHeader::new(CodingParams::new(k, m).unwrap(), idx, pad).unwrap()
    }

    #[test]
    fn header_bytes_are_fixed_layout() {
        let h = header(10, 15, 12, 7);
        assert_eq!(h.to_bytes(), [1, 10, 15, 12, 0, 0, 0, 7]);
        assert_eq!(ChunkHeader::parse(&h.to_bytes()).unwrap(), h);
    }

    #[test]
    fn header_rejects_garbage() {
        assert!(ChunkHeader::parse(&[1, 10, 15]).is_err());
        assert!(ChunkHeader::parse(&[2, 10, 15, 0, 0, 0, 0, 0]).is_err());
        assert!(ChunkHeader::parse(&[1, 10, 15, 15, 0, 0, 0, 0]).is_err());
        assert!(ChunkHeader::parse(&[1, 0, 15, 0, 0, 0, 0, 0]).is_err());
        assert!(ChunkHeader::parse(&[1, 10, 9, 0, 0, 0, 0, 0]).is_err());
        assert!(ChunkHeader::parse(&[1, 10, 15, 0, 0, 0, 0, 10]).is_err());
    }

    #[test]
    fn share_names() {
        assert_eq!(chunk_filename("data.bin", &header(10, 15, 0, 0)).unwrap(), "data.bin.00_15.fec");
        assert_eq!(chunk_filename("data.bin", &header(3, 10, 9, 0)).unwrap(), "data.bin.09_10.fec");
        assert_eq!(chunk_filename("x", &header(1, 1, 0, 0)).unwrap(), "x.0_1.fec");
        assert_eq!(chunk_filename("x", &header(3, 101, 7, 0)).unwrap(), "x.007_101.fec");
    }

    #[test]
    fn malformed_names_rejected() {
        for name in [
            "data.bin",
            "data.bin.fec",
            "data.bin.0_15.fec",
            "data.bin.15_15.fec",
            "data.bin.a0_15.fec",
            ".00_15.fec",
            "data.bin.00_15",
            "data.bin.00-15.fec",
        ] {
            assert!(parse_chunk_filename(name).is_err(), "{name} parsed");
        }
        assert!(format_share_name("a/b", 0, 1).is_err());
        assert!(format_share_name("", 0, 1).is_err());
    }

    proptest! {
        #[test]
        fn share_name_roundtrip(base in "[A-Za-z0-9_.-]{1,20}", total in 1usize..=255, idx_seed in any::<usize>()) {
            let idx = idx_seed % total;
            let name = format_share_name(&base, idx, total).unwrap();
            let parsed = parse_chunk_filename(&name).unwrap();
            prop_assert_eq!(parsed, ChunkName { base, chunk_index: idx, total });
        }

        #[test]
        fn header_roundtrip(k in 1usize..=255, extra in 0usize..=254, idx_seed in any::<usize>(), pad_seed in any::<u32>()) {
            let m = (k + extra).min(255);
            let pad = pad_seed % k as u32;
            let h = header(k, m, idx_seed % m, pad);
            prop_assert_eq!(ChunkHeader::parse(&h.to_bytes()).unwrap(), h);
        }
    }
}
