//! Cost-model calibration against the reference upload timings.
//!
//! The reference measurements are four upload timings: a 756 KB file sent
//! whole and in ten 75.6 KB pieces, and a 2.4 GB file sent whole and in ten
//! 243 MB pieces. Under `cost(size) = setup_latency + size / bandwidth` the
//! two per-piece timings pin both parameters; the whole-file timings are then
//! predictions and serve as the check.

use serde::{Deserialize, Serialize};

use super::bench::{BenchCase, BenchScenario};
use super::AnalysisError;
use crate::endpoint::{CostModel, EndpointDescriptor};
use crate::transfer::Direction;

pub const SMALL_FILE_BYTES: u64 = 756_000;
pub const LARGE_FILE_BYTES: u64 = 2_400_000_000;
/// Size of one piece of the large file as recorded with the timings.
pub const LARGE_PIECE_BYTES: u64 = 243_000_000;
pub const PIECES: usize = 10;

/// Reference upload timings in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UploadTimings {
    pub small_whole: f64,
    pub small_split_total: f64,
    pub small_split_per_piece: f64,
    pub large_whole: f64,
    pub large_split_total: f64,
    pub large_split_per_piece: f64,
}

pub const REFERENCE_TIMINGS: UploadTimings = UploadTimings {
    small_whole: 6.0,
    small_split_total: 54.0,
    small_split_per_piece: 5.5,
    large_whole: 142.0,
    large_split_total: 206.0,
    large_split_per_piece: 20.0,
};

/// Fit `setup + size / bandwidth` through two (size, seconds) points.
pub fn solve_two_point(a: (u64, f64), b: (u64, f64)) -> Result<CostModel, AnalysisError> {
    let (sa, ta) = (a.0 as f64, a.1);
    let (sb, tb) = (b.0 as f64, b.1);
    if sa == sb || tb == ta {
        return Err(AnalysisError::Calibration("calibration points must differ in size and time".into()));
    }
    let bandwidth = (sb - sa) / (tb - ta);
    let setup = ta - sa / bandwidth;
    CostModel::new(setup, bandwidth).map_err(|e| AnalysisError::Calibration(e.to_string()))
}

/// Least-squares fit of `setup + size / bandwidth` over any number of points.
pub fn solve_least_squares(points: &[(u64, f64)]) -> Result<CostModel, AnalysisError> {
    if points.len() < 2 {
        return Err(AnalysisError::Calibration("need at least two points".into()));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 as f64 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 || sxy <= 0.0 {
        return Err(AnalysisError::Calibration("points do not determine a positive bandwidth".into()));
    }
    let slope = sxy / sxx;
    CostModel::new(mean_y - slope * mean_x, 1.0 / slope).map_err(|e| AnalysisError::Calibration(e.to_string()))
}

/// The committed cost model: the two-point fit through the per-piece timings.
pub fn fitted_cost_model() -> CostModel {
    solve_two_point(
        (SMALL_FILE_BYTES / PIECES as u64, REFERENCE_TIMINGS.small_split_per_piece),
        (LARGE_PIECE_BYTES, REFERENCE_TIMINGS.large_split_per_piece),
    )
    .expect("reference timings give a valid fit")
}

/// Bytes charged per real byte when simulating the large file.
pub const LARGE_BYTE_SCALE: u64 = 1000;

/// Serial uploads of the small or large file, whole (k = m = 1) and in
/// ten uncoded pieces (k = m = 10), on uniform endpoints with `cost`.
pub fn upload_scenario(size_bytes: u64, byte_scale: u64, cost: CostModel) -> BenchScenario {
    let endpoints = (0..PIECES)
        .map(|i| EndpointDescriptor::simulated(format!("se{i:02}"), cost, 0.0, i as u64 + 1))
        .collect();
    BenchScenario {
        name: format!("upload-{size_bytes}"),
        rng_seed: 1,
        repetitions: 1,
        byte_scale,
        codec_bandwidth: None,
        directions: vec![Direction::Put],
        threads: vec![1],
        cases: vec![
            BenchCase {
                label: Some("whole".into()),
                size_bytes,
                k: 1,
                m: 1,
            },
            BenchCase {
                label: Some("split".into()),
                size_bytes,
                k: PIECES,
                m: PIECES,
            },
        ],
        endpoints,
        wall_clock: false,
    }
}

/// Reproduce the reference timings in virtual time under `cost`.
pub fn reproduce_upload_timings(cost: CostModel) -> Result<UploadTimings, AnalysisError> {
    let small = super::bench::run_bench(&upload_scenario(SMALL_FILE_BYTES, 1, cost))?;
    let large = super::bench::run_bench(&upload_scenario(LARGE_FILE_BYTES, LARGE_BYTE_SCALE, cost))?;
    let row = |rows: &[super::bench::BenchRow], k: usize| {
        rows.iter()
            .find(|r| r.k == k)
            .cloned()
            .ok_or_else(|| AnalysisError::Scenario(format!("no row for k={k}")))
    };
    let (sw, ss) = (row(&small.rows, 1)?, row(&small.rows, PIECES)?);
    let (lw, ls) = (row(&large.rows, 1)?, row(&large.rows, PIECES)?);
    Ok(UploadTimings {
        small_whole: sw.total_s,
        small_split_total: ss.total_s,
        small_split_per_piece: ss.avg_chunk_s,
        large_whole: lw.total_s,
        large_split_total: ls.total_s,
        large_split_per_piece: ls.avg_chunk_s,
    })
}

/// Signed relative deviation of each predicted cell from the reference.
pub fn relative_deviations(predicted: &UploadTimings) -> [(&'static str, f64, f64, f64); 6] {
    let r = REFERENCE_TIMINGS;
    let cell = |name, p: f64, want: f64| (name, p, want, (p - want) / want);
    [
        cell("small whole", predicted.small_whole, r.small_whole),
        cell("small split total", predicted.small_split_total, r.small_split_total),
        cell("small split per piece", predicted.small_split_per_piece, r.small_split_per_piece),
        cell("large whole", predicted.large_whole, r.large_whole),
        cell("large split total", predicted.large_split_total, r.large_split_total),
        cell("large split per piece", predicted.large_split_per_piece, r.large_split_per_piece),
    ]
}
