//! Availability arithmetic and the transfer benchmark harness.

pub mod availability;
pub mod bench;
pub mod calibration;

use std::path::PathBuf;

use thiserror::Error;

pub use availability::{
    binomial_tail, default_schemes, file_availability, overhead_resilience_table, placement_availability,
    AvailabilityModel, OverheadRow, Scheme,
};
pub use bench::{run_bench, BenchCase, BenchOutcome, BenchRow, BenchScenario, CSV_HEADER};
pub use calibration::{fitted_cost_model, reproduce_upload_timings, UploadTimings, REFERENCE_TIMINGS};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("{0}")]
    InvalidScheme(String),
    #[error("scheme needs {pieces} distinct endpoints but only {endpoints} are available")]
    TooFewEndpoints { pieces: usize, endpoints: usize },
    #[error("calibration: {0}")]
    Calibration(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Transfer(#[from] crate::transfer::TransferError),
    #[error(transparent)]
    Endpoint(#[from] crate::endpoint::EndpointError),
    #[error(transparent)]
    Codec(#[from] crate::codec::CodecError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
