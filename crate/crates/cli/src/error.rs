use ecstore::analysis::AnalysisError;
use ecstore::catalogue::CatalogueError;
use ecstore::codec::CodecError;
use ecstore::endpoint::EndpointError;
use ecstore::transfer::{ChunkFailure, TransferError};
use serde::Serialize;
use thiserror::Error;

/// Process exit codes.
pub mod code {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const CODEC: i32 = 4;
    pub const UPLOAD_FAILED: i32 = 5;
    pub const DOWNLOAD_FAILED: i32 = 6;
    pub const DUPLICATE: i32 = 7;
    pub const NOT_FOUND: i32 = 8;
    pub const CORRUPTION: i32 = 9;
    pub const NOT_RECOVERABLE: i32 = 10;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("codec error: {0}")]
    Codec(String),
    #[error("{message}")]
    UploadFailed { message: String, failures: Vec<ChunkFailure> },
    #[error("{message}")]
    DownloadFailed { message: String, failures: Vec<ChunkFailure> },
    #[error("{0} already exists")]
    Duplicate(String),
    #[error("{0} not found")]
    NotFound(String),
    #[error("{0}")]
    Corruption(String),
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Debug, Serialize)]
pub struct ErrorBody<'a> {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failures: Option<&'a [ChunkFailure]>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => code::CONFIG,
            CliError::Codec(_) => code::CODEC,
            CliError::UploadFailed { .. } => code::UPLOAD_FAILED,
            CliError::DownloadFailed { .. } => code::DOWNLOAD_FAILED,
            CliError::Duplicate(_) => code::DUPLICATE,
            CliError::NotFound(_) => code::NOT_FOUND,
            CliError::Corruption(_) => code::CORRUPTION,
            CliError::Io(_) => code::INTERNAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Codec(_) => "codec",
            CliError::UploadFailed { .. } => "upload_failed",
            CliError::DownloadFailed { .. } => "download_failed",
            CliError::Duplicate(_) => "duplicate",
            CliError::NotFound(_) => "not_found",
            CliError::Corruption(_) => "corruption",
            CliError::Io(_) => "io",
        }
    }

    pub fn body(&self) -> ErrorBody<'_> {
        let failures = match self {
            CliError::UploadFailed { failures, .. } | CliError::DownloadFailed { failures, .. } => Some(failures.as_slice()),
            _ => None,
        };
        ErrorBody {
            code: self.exit_code(),
            kind: self.kind(),
            message: self.to_string(),
            failures,
        }
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        match e {
            // Bad k/m values come from flags or config.
            CodecError::InvalidParams { .. } => CliError::Config(e.to_string()),
            other => CliError::Codec(other.to_string()),
        }
    }
}

impl From<CatalogueError> for CliError {
    fn from(e: CatalogueError) -> Self {
        match e {
            CatalogueError::AlreadyExists(p) => CliError::Duplicate(p),
            CatalogueError::NotFound(p) => CliError::NotFound(p),
            CatalogueError::Corruption { .. } | CatalogueError::Malformed { .. } => CliError::Corruption(e.to_string()),
            CatalogueError::InvalidPath { .. } | CatalogueError::InvalidManifest { .. } => CliError::Config(e.to_string()),
            CatalogueError::Io { .. } => CliError::Io(e.to_string()),
        }
    }
}

impl From<EndpointError> for CliError {
    fn from(e: EndpointError) -> Self {
        match e {
            EndpointError::Config(_) | EndpointError::UnknownEndpoint(_) => CliError::Config(e.to_string()),
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<TransferError> for CliError {
    fn from(e: TransferError) -> Self {
        match e {
            TransferError::Codec(c) => c.into(),
            TransferError::Catalogue(c) => c.into(),
            TransferError::Endpoint(c) => c.into(),
            TransferError::Placement(p) => CliError::Config(p.to_string()),
            TransferError::Policy(p) => CliError::Config(p),
            TransferError::UploadFailed { ref failures, .. } => CliError::UploadFailed {
                message: e.to_string(),
                failures: failures.clone(),
            },
            TransferError::DownloadFailed { ref failures, .. } => CliError::DownloadFailed {
                message: e.to_string(),
                failures: failures.clone(),
            },
            TransferError::Io { .. } => CliError::Io(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Transfer(t) => t.into(),
            AnalysisError::Codec(c) => c.into(),
            AnalysisError::Io { .. } | AnalysisError::Csv(_) => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
