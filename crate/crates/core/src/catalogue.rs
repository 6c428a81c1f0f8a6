//! Logical namespace for stored files.
//!
//! Each file is a directory entry named by its logical path, carrying the
//! coding metadata, with one chunk record per stored share beneath it. The
//! directory metadata is authoritative; chunk file names and per-chunk
//! metadata are checked against it on every lookup.
//!
//! The whole catalogue persists as one JSON document (see [`CatalogueDocument`]),
//! rewritten through a temporary file and an atomic rename on each mutation.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{self, CodingParams};

pub const KEY_SPLIT: &str = "EC_SPLIT";
pub const KEY_TOTAL: &str = "EC_TOTAL";
pub const KEY_VERSION: &str = "EC_VERSION";
pub const KEY_SIZE: &str = "EC_SIZE";
pub const KEY_PAD: &str = "EC_PAD";
pub const KEY_INDEX: &str = "EC_INDEX";

/// Prefix carried by every metadata key this crate writes.
pub const KEY_PREFIX: &str = "EC_";

pub const DOCUMENT_FORMAT: &str = "ecstore-catalogue";
pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CatalogueError {
    #[error("{0} is already registered")]
    AlreadyExists(String),
    #[error("{0} not found")]
    NotFound(String),
    #[error("catalogue corruption at {entry}: {reason}")]
    Corruption { entry: String, reason: String },
    #[error("invalid logical path {path:?}: {reason}")]
    InvalidPath { path: String, reason: &'static str },
    #[error("invalid manifest for {path}: {reason}")]
    InvalidManifest { path: String, reason: String },
    #[error("catalogue io error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("catalogue document {path} is malformed: {reason}")]
    Malformed { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChunkLocation {
    pub chunk_index: usize,
    pub endpoint_id: String,
    pub remote_name: String,
}

/// Everything needed to fetch and decode one logical file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileManifest {
    pub logical_path: String,
    pub params: CodingParams,
    pub original_size: u64,
    pub pad_length: u32,
    /// Sorted by chunk index.
    pub chunk_locations: Vec<ChunkLocation>,
}

impl FileManifest {
    pub fn chunk_len(&self) -> u64 {
        (self.original_size + u64::from(self.pad_length)) / self.params.k() as u64
    }

    /// Last path component; the base of every share name.
    pub fn base_name(&self) -> &str {
        base_name(&self.logical_path)
    }

    pub fn location(&self, chunk_index: usize) -> Option<&ChunkLocation> {
        self.chunk_locations.iter().find(|l| l.chunk_index == chunk_index)
    }

    fn validate(&self) -> Result<(), CatalogueError> {
        let invalid = |reason: String| CatalogueError::InvalidManifest {
            path: self.logical_path.clone(),
            reason,
        };
        let k = self.params.k() as u64;
        if (self.original_size + u64::from(self.pad_length)) % k != 0 {
            return Err(invalid(format!(
                "size {} plus pad {} is not a multiple of k={k}",
                self.original_size, self.pad_length
            )));
        }
        let expected_pad = (k - self.original_size % k) % k;
        if u64::from(self.pad_length) != expected_pad {
            return Err(invalid(format!(
                "pad {} inconsistent with size {} (expected {expected_pad})",
                self.pad_length, self.original_size
            )));
        }
        if self.chunk_locations.len() > self.params.m() {
            return Err(invalid("more locations than chunks".into()));
        }
        let mut seen = BTreeSet::new();
        for loc in &self.chunk_locations {
            if loc.chunk_index >= self.params.m() {
                return Err(invalid(format!("chunk index {} out of range", loc.chunk_index)));
            }
            if !seen.insert(loc.chunk_index) {
                return Err(invalid(format!("duplicate chunk index {}", loc.chunk_index)));
            }
            if loc.endpoint_id.is_empty() || loc.remote_name.is_empty() {
                return Err(invalid(format!("chunk {} has an empty location", loc.chunk_index)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntryKind {
    Directory,
    Chunk { endpoint_id: String, remote_name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogueEntry {
    pub logical_path: String,
    #[serde(flatten)]
    pub kind: EntryKind,
    pub metadata: BTreeMap<String, String>,
}

/// Persisted form of the catalogue.
///
/// ```json
/// {
///   "format": "ecstore-catalogue",
///   "version": 1,
///   "entries": [
///     { "logical_path": "/data/f.bin", "kind": "directory",
///       "metadata": { "EC_PAD": "0", "EC_SIZE": "20", "EC_SPLIT": "2", "EC_TOTAL": "3", "EC_VERSION": "1" } },
///     { "logical_path": "/data/f.bin/f.bin.0_3.fec", "kind": "chunk",
///       "endpoint_id": "A", "remote_name": "data%2Ff.bin.0_3.fec",
///       "metadata": { "EC_INDEX": "0", "EC_SPLIT": "2", "EC_TOTAL": "3", "EC_VERSION": "1" } }
///   ]
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogueDocument {
    pub format: String,
    pub version: u32,
    pub entries: Vec<CatalogueEntry>,
}

/// Check a `/`-separated logical path: absolute, no empty, `.` or `..`
/// components, no trailing slash.
pub fn validate_logical_path(path: &str) -> Result<(), CatalogueError> {
    let invalid = |reason| CatalogueError::InvalidPath {
        path: path.to_string(),
        reason,
    };
    let rest = path.strip_prefix('/').ok_or_else(|| invalid("must start with '/'"))?;
    if rest.is_empty() {
        return Err(invalid("the root is not a file"));
    }
    for comp in rest.split('/') {
        match comp {
            "" => return Err(invalid("empty path component")),
            "." | ".." => return Err(invalid("relative path component")),
            c if c.contains('\\') || c.contains('\0') => {
                return Err(invalid("backslash or NUL in path"))
            }
            _ => {}
        }
    }
    Ok(())
}

pub fn base_name(logical_path: &str) -> &str {
    logical_path.rsplit('/').next().unwrap_or(logical_path)
}

fn parent_of(path: &str) -> Option<&str> {
    path.rsplit_once('/').map(|(p, _)| p).filter(|p| !p.is_empty())
}

fn coding_metadata(params: CodingParams) -> BTreeMap<String, String> {
    BTreeMap::from([
        (KEY_SPLIT.to_string(), params.k().to_string()),
        (KEY_TOTAL.to_string(), params.m().to_string()),
        (KEY_VERSION.to_string(), codec::FORMAT_VERSION.to_string()),
    ])
}

/// The file catalogue. Mutations take `&mut self`; share it behind a
/// `RwLock` for the single-writer, many-reader pattern.
#[derive(Debug, Clone, Default)]
pub struct Catalogue {
    entries: BTreeMap<String, CatalogueEntry>,
    path: Option<PathBuf>,
}

impl Catalogue {
    pub fn in_memory() -> Self {
        Catalogue::default()
    }

    /// Load the catalogue at `path`, or start an empty one there.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CatalogueError> {
        let path = path.as_ref().to_path_buf();
        let entries = match fs::read_to_string(&path) {
            Ok(text) => {
                let doc = Self::parse_document(&path, &text)?;
                doc.entries
                    .into_iter()
                    .map(|e| (e.logical_path.clone(), e))
                    .collect()
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => BTreeMap::new(),
            Err(source) => return Err(CatalogueError::Io { path, source }),
        };
        Ok(Catalogue {
            entries,
            path: Some(path),
        })
    }

    fn parse_document(path: &Path, text: &str) -> Result<CatalogueDocument, CatalogueError> {
        let malformed = |reason: String| CatalogueError::Malformed {
            path: path.to_path_buf(),
            reason,
        };
        let doc: CatalogueDocument = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        if doc.format != DOCUMENT_FORMAT {
            return Err(malformed(format!("unexpected format tag {:?}", doc.format)));
        }
        if doc.version != DOCUMENT_VERSION {
            return Err(malformed(format!("unsupported version {}", doc.version)));
        }
        Ok(doc)
    }

    pub fn storage_path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn document(&self) -> CatalogueDocument {
        CatalogueDocument {
            format: DOCUMENT_FORMAT.to_string(),
            version: DOCUMENT_VERSION,
            entries: self.entries.values().cloned().collect(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = &CatalogueEntry> {
        self.entries.values()
    }

    fn persist(&self) -> Result<(), CatalogueError> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let io_err = |source| CatalogueError::Io {
            path: path.clone(),
            source,
        };
        let mut text = serde_json::to_string_pretty(&self.document()).expect("document serializes");
        text.push('\n');
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, text).map_err(io_err)?;
        fs::rename(&tmp, path).map_err(io_err)
    }

    /// Add a file and its chunk records. Nothing is stored if persisting fails.
    pub fn register_file(&mut self, manifest: &FileManifest) -> Result<CatalogueEntry, CatalogueError> {
        let dir = manifest.logical_path.as_str();
        validate_logical_path(dir)?;
        manifest.validate()?;
        if self.entries.contains_key(dir) {
            return Err(CatalogueError::AlreadyExists(dir.to_string()));
        }
        let mut ancestor = parent_of(dir);
        while let Some(a) = ancestor {
            if self.entries.contains_key(a) {
                return Err(CatalogueError::InvalidPath {
                    path: dir.to_string(),
                    reason: "an ancestor path is a registered file",
                });
            }
            ancestor = parent_of(a);
        }
        let child_prefix = format!("{dir}/");
        if self.entries.range(child_prefix.clone()..).next().is_some_and(|(p, _)| p.starts_with(&child_prefix)) {
            return Err(CatalogueError::InvalidPath {
                path: dir.to_string(),
                reason: "registered files exist beneath this path",
            });
        }

        let params = manifest.params;
        let mut dir_meta = coding_metadata(params);
        dir_meta.insert(KEY_SIZE.into(), manifest.original_size.to_string());
        dir_meta.insert(KEY_PAD.into(), manifest.pad_length.to_string());
        let dir_entry = CatalogueEntry {
            logical_path: dir.to_string(),
            kind: EntryKind::Directory,
            metadata: dir_meta,
        };

        let base = manifest.base_name();
        let mut new_entries = vec![dir_entry.clone()];
        for loc in &manifest.chunk_locations {
            let name = codec::format_share_name(base, loc.chunk_index, params.m()).map_err(|e| {
                CatalogueError::InvalidManifest {
                    path: dir.to_string(),
                    reason: e.to_string(),
                }
            })?;
            let mut meta = coding_metadata(params);
            meta.insert(KEY_INDEX.into(), loc.chunk_index.to_string());
            new_entries.push(CatalogueEntry {
                logical_path: format!("{dir}/{name}"),
                kind: EntryKind::Chunk {
                    endpoint_id: loc.endpoint_id.clone(),
                    remote_name: loc.remote_name.clone(),
                },
                metadata: meta,
            });
        }

        let before = self.entries.clone();
        for e in new_entries {
            self.entries.insert(e.logical_path.clone(), e);
        }
        if let Err(e) = self.persist() {
            self.entries = before;
            return Err(e);
        }
        Ok(dir_entry)
    }

    pub fn lookup(&self, logical_path: &str) -> Result<FileManifest, CatalogueError> {
        let dir = self
            .entries
            .get(logical_path)
            .ok_or_else(|| CatalogueError::NotFound(logical_path.to_string()))?;
        let corrupt = |entry: &str, reason: String| CatalogueError::Corruption {
            entry: entry.to_string(),
            reason,
        };
        if dir.kind != EntryKind::Directory {
            return Err(CatalogueError::NotFound(logical_path.to_string()));
        }
        let meta_num = |entry: &CatalogueEntry, key: &str| -> Result<u64, CatalogueError> {
            let raw = entry
                .metadata
                .get(key)
                .ok_or_else(|| corrupt(&entry.logical_path, format!("missing {key}")))?;
            raw.parse()
                .map_err(|_| corrupt(&entry.logical_path, format!("{key}={raw:?} is not a number")))
        };
        let k = meta_num(dir, KEY_SPLIT)? as usize;
        let m = meta_num(dir, KEY_TOTAL)? as usize;
        let version = meta_num(dir, KEY_VERSION)?;
        if version != u64::from(codec::FORMAT_VERSION) {
            return Err(corrupt(logical_path, format!("unsupported {KEY_VERSION}={version}")));
        }
        let params = CodingParams::new(k, m).map_err(|e| corrupt(logical_path, e.to_string()))?;
        let original_size = meta_num(dir, KEY_SIZE)?;
        let pad_length = u32::try_from(meta_num(dir, KEY_PAD)?)
            .map_err(|_| corrupt(logical_path, format!("{KEY_PAD} out of range")))?;

        let base = base_name(logical_path);
        let child_prefix = format!("{logical_path}/");
        let mut chunk_locations = Vec::new();
        for (path, entry) in self.entries.range(child_prefix.clone()..) {
            let Some(name) = path.strip_prefix(&child_prefix) else {
                break;
            };
            if name.contains('/') {
                continue;
            }
            let EntryKind::Chunk {
                endpoint_id,
                remote_name,
            } = &entry.kind
            else {
                continue;
            };
            let parsed = codec::parse_chunk_filename(name).map_err(|e| corrupt(path, e.to_string()))?;
            if parsed.base != base {
                return Err(corrupt(path, format!("share base {:?} differs from {base:?}", parsed.base)));
            }
            if parsed.total != m {
                return Err(corrupt(
                    path,
                    format!("file name says {} chunks but {KEY_TOTAL}={m}", parsed.total),
                ));
            }
            for (key, want) in [(KEY_SPLIT, k as u64), (KEY_TOTAL, m as u64), (KEY_INDEX, parsed.chunk_index as u64)] {
                if entry.metadata.contains_key(key) && meta_num(entry, key)? != want {
                    return Err(corrupt(path, format!("{key} disagrees with directory metadata or file name")));
                }
            }
            chunk_locations.push(ChunkLocation {
                chunk_index: parsed.chunk_index,
                endpoint_id: endpoint_id.clone(),
                remote_name: remote_name.clone(),
            });
        }
        chunk_locations.sort();
        let manifest = FileManifest {
            logical_path: logical_path.to_string(),
            params,
            original_size,
            pad_length,
            chunk_locations,
        };
        manifest
            .validate()
            .map_err(|e| corrupt(logical_path, e.to_string()))?;
        Ok(manifest)
    }

    /// Registered file paths starting with `prefix`, sorted.
    pub fn list_files(&self, prefix: &str) -> Vec<String> {
        self.entries
            .range(prefix.to_string()..)
            .take_while(|(p, _)| p.starts_with(prefix))
            .filter(|(_, e)| e.kind == EntryKind::Directory)
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// Remove a file and its chunk records, returning its manifest so the
    /// caller can delete the remote chunks.
    pub fn unregister(&mut self, logical_path: &str) -> Result<FileManifest, CatalogueError> {
        let manifest = match self.lookup(logical_path) {
            Ok(m) => m,
            // Corrupt records are still removable.
            Err(CatalogueError::Corruption { .. }) if self.entries.contains_key(logical_path) => FileManifest {
                logical_path: logical_path.to_string(),
                params: CodingParams::new(1, 1).expect("valid"),
                original_size: 0,
                pad_length: 0,
                chunk_locations: Vec::new(),
            },
            Err(e) => return Err(e),
        };
        let before = self.entries.clone();
        let child_prefix = format!("{logical_path}/");
        self.entries
            .retain(|p, _| p != logical_path && !p.starts_with(&child_prefix));
        if let Err(e) = self.persist() {
            self.entries = before;
            return Err(e);
        }
        Ok(manifest)
    }

    /// Direct access for tests and repair tooling: overwrite one raw entry.
    #[doc(hidden)]
    pub fn insert_raw_entry(&mut self, entry: CatalogueEntry) {
        self.entries.insert(entry.logical_path.clone(), entry);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(path: &str, k: usize, m: usize, size: u64) -> FileManifest {
        let params = CodingParams::new(k, m).unwrap();
        FileManifest {
            logical_path: path.into(),
            params,
            original_size: size,
            pad_length: params.pad_length(size as usize) as u32,
            chunk_locations: (0..m)
                .map(|i| ChunkLocation {
                    chunk_index: i,
                    endpoint_id: format!("se{}", i % 3),
                    remote_name: format!("obj{i}"),
                })
                .collect(),
        }
    }

    #[test]
    fn register_writes_prefixed_metadata() {
        let mut cat = Catalogue::in_memory();
        let dir = cat.register_file(&manifest("/data/f.bin", 10, 15, 1000)).unwrap();
        assert_eq!(dir.metadata[KEY_SPLIT], "10");
        assert_eq!(dir.metadata[KEY_TOTAL], "15");
        assert_eq!(dir.metadata[KEY_VERSION], "1");
        assert_eq!(cat.entries().count(), 16);
        for e in cat.entries() {
            assert!(e.metadata.keys().all(|k| k.starts_with(KEY_PREFIX)));
        }
    }

    #[test]
    fn lookup_roundtrip_and_not_found() {
        let mut cat = Catalogue::in_memory();
        let m = manifest("/a/b.dat", 8, 10, 77);
        cat.register_file(&m).unwrap();
        assert_eq!(cat.lookup("/a/b.dat").unwrap(), m);
        assert!(matches!(cat.lookup("/a/c.dat"), Err(CatalogueError::NotFound(_))));
        assert!(matches!(cat.lookup("/a/b.dat/b.dat.00_10.fec"), Err(CatalogueError::NotFound(_))));
    }

    #[test]
    fn duplicate_and_nested_paths_rejected() {
        let mut cat = Catalogue::in_memory();
        cat.register_file(&manifest("/x", 2, 3, 10)).unwrap();
        assert!(matches!(
            cat.register_file(&manifest("/x", 2, 3, 10)),
            Err(CatalogueError::AlreadyExists(_))
        ));
        assert!(matches!(
            cat.register_file(&manifest("/x/y", 2, 3, 10)),
            Err(CatalogueError::InvalidPath { .. })
        ));
        cat.register_file(&manifest("/d/e", 2, 3, 10)).unwrap();
        assert!(matches!(
            cat.register_file(&manifest("/d", 2, 3, 10)),
            Err(CatalogueError::InvalidPath { .. })
        ));
    }

    #[test]
    fn invalid_paths_and_manifests() {
        for p in ["", "rel", "/", "/a//b", "/a/./b", "/a/../b", "/a/"] {
            assert!(validate_logical_path(p).is_err(), "{p}");
        }
        let mut cat = Catalogue::in_memory();
        let mut bad = manifest("/f", 4, 6, 10);
        bad.pad_length = 1;
        assert!(matches!(cat.register_file(&bad), Err(CatalogueError::InvalidManifest { .. })));
        let mut dup = manifest("/f", 4, 6, 12);
        dup.chunk_locations[1].chunk_index = 0;
        assert!(matches!(cat.register_file(&dup), Err(CatalogueError::InvalidManifest { .. })));
        assert_eq!(cat.entries().count(), 0);
    }

    #[test]
    fn filename_total_disagreement_is_corruption() {
        let mut cat = Catalogue::in_memory();
        cat.register_file(&manifest("/f.bin", 8, 10, 80)).unwrap();
        cat.insert_raw_entry(CatalogueEntry {
            logical_path: "/f.bin/f.bin.03_12.fec".into(),
            kind: EntryKind::Chunk {
                endpoint_id: "se0".into(),
                remote_name: "x".into(),
            },
            metadata: BTreeMap::new(),
        });
        match cat.lookup("/f.bin") {
            Err(CatalogueError::Corruption { entry, .. }) => assert_eq!(entry, "/f.bin/f.bin.03_12.fec"),
            other => panic!("expected corruption, got {other:?}"),
        }
    }

    #[test]
    fn chunk_metadata_disagreement_is_corruption() {
        let mut cat = Catalogue::in_memory();
        cat.register_file(&manifest("/f.bin", 2, 3, 8)).unwrap();
        let key = "/f.bin/f.bin.1_3.fec";
        let mut e = cat.entries.get(key).unwrap().clone();
        e.metadata.insert(KEY_SPLIT.into(), "3".into());
        cat.insert_raw_entry(e);
        assert!(matches!(cat.lookup("/f.bin"), Err(CatalogueError::Corruption { .. })));
        // Still removable.
        cat.unregister("/f.bin").unwrap();
        assert_eq!(cat.entries().count(), 0);
    }

    #[test]
    fn list_and_unregister() {
        let mut cat = Catalogue::in_memory();
        assert!(cat.list_files("").is_empty());
        cat.register_file(&manifest("/a", 2, 3, 4)).unwrap();
        cat.register_file(&manifest("/b", 2, 3, 4)).unwrap();
        cat.register_file(&manifest("/sub/c", 2, 3, 4)).unwrap();
        assert_eq!(cat.list_files(""), vec!["/a", "/b", "/sub/c"]);
        assert_eq!(cat.list_files("/sub"), vec!["/sub/c"]);
        let removed = cat.unregister("/a").unwrap();
        assert_eq!(removed.chunk_locations.len(), 3);
        assert!(matches!(cat.lookup("/a"), Err(CatalogueError::NotFound(_))));
        assert!(matches!(cat.unregister("/a"), Err(CatalogueError::NotFound(_))));
        assert_eq!(cat.list_files(""), vec!["/b", "/sub/c"]);
    }

    #[test]
    fn partial_manifest_allowed() {
        let mut cat = Catalogue::in_memory();
        let mut m = manifest("/p", 4, 6, 40);
        m.chunk_locations.retain(|l| l.chunk_index % 2 == 0);
        cat.register_file(&m).unwrap();
        assert_eq!(cat.lookup("/p").unwrap(), m);
    }

    #[test]
    fn persistence_reload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cat.json");
        let mut cat = Catalogue::open(&path).unwrap();
        cat.register_file(&manifest("/one", 3, 5, 100)).unwrap();
        cat.register_file(&manifest("/two", 1, 1, 0)).unwrap();
        let reloaded = Catalogue::open(&path).unwrap();
        assert_eq!(reloaded.document(), cat.document());
        assert_eq!(reloaded.lookup("/one").unwrap(), cat.lookup("/one").unwrap());
        assert!(!path.with_extension("tmp").exists());
        let text = fs::read_to_string(&path).unwrap();
        assert!(!text.contains("\"SPLIT\"") && !text.contains("\"TOTAL\""));
    }

    #[test]
    fn malformed_document_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cat.json");
        fs::write(&path, "{\"format\":\"other\",\"version\":1,\"entries\":[]}").unwrap();
        assert!(matches!(Catalogue::open(&path), Err(CatalogueError::Malformed { .. })));
        fs::write(&path, "not json").unwrap();
        assert!(matches!(Catalogue::open(&path), Err(CatalogueError::Malformed { .. })));
    }
}
