//! Browser bindings: availability curves, placement layouts and simulated
//! transfer scaling. Every export returns a JSON string.

use ecstore::analysis::{self, placement_availability, AvailabilityModel, Scheme};
use ecstore::catalogue::Catalogue;
use ecstore::codec::CodingParams;
use ecstore::endpoint::{CostModel, EndpointDescriptor, Endpoints, SimClock};
use ecstore::placement::{round_robin, EndpointVector};
use ecstore::transfer::{Pipeline, TransferPolicy, VirtualExecutor};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest buffer the scaling simulation moves for real; bigger files are
/// modelled through the clock's byte scale.
const MAX_REAL_BYTES: u64 = 1 << 20;

fn to_js<T: Serialize>(value: &T) -> Result<String, JsError> {
    serde_json::to_string(value).map_err(|e| JsError::new(&e.to_string()))
}

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

#[derive(Serialize)]
struct CurvePoint {
    p: f64,
    erasure: f64,
    replication: f64,
}

#[derive(Serialize)]
struct Curve {
    erasure_label: String,
    replication_label: String,
    erasure_overhead: f64,
    replication_overhead: f64,
    points: Vec<CurvePoint>,
}

/// File availability of erasure (k, m) and replication r against endpoint
/// availability p, sampled at `samples` points in [p_min, 1].
#[wasm_bindgen]
pub fn availability_curve(k: usize, m: usize, r: usize, p_min: f64, samples: usize) -> Result<String, JsError> {
    let ec = Scheme::erasure(k, m).map_err(err)?;
    let rep = Scheme::replication(r).map_err(err)?;
    if !(0.0..1.0).contains(&p_min) || samples < 2 {
        return Err(JsError::new("need 0 <= p_min < 1 and at least two samples"));
    }
    let mut points = Vec::with_capacity(samples);
    for i in 0..samples {
        let p = p_min + (1.0 - p_min) * i as f64 / (samples - 1) as f64;
        points.push(CurvePoint {
            p,
            erasure: analysis::file_availability(&AvailabilityModel::new(p, ec)).map_err(err)?,
            replication: analysis::file_availability(&AvailabilityModel::new(p, rep)).map_err(err)?,
        });
    }
    to_js(&Curve {
        erasure_label: ec.to_string(),
        replication_label: rep.to_string(),
        erasure_overhead: ec.storage_overhead(),
        replication_overhead: rep.storage_overhead(),
        points,
    })
}

#[derive(Serialize)]
struct EndpointLayout {
    id: String,
    chunks: Vec<usize>,
}

#[derive(Serialize)]
struct Layout {
    k: usize,
    m: usize,
    endpoints: Vec<EndpointLayout>,
    /// Availability with chunks sharing endpoints as laid out.
    placed_availability: f64,
    /// Availability if every chunk had its own endpoint.
    spread_availability: f64,
}

/// Round-robin layout of m chunks over s endpoints and its availability at p.
#[wasm_bindgen]
pub fn placement_layout(k: usize, m: usize, s: usize, p: f64) -> Result<String, JsError> {
    CodingParams::new(k, m).map_err(err)?;
    let ev = EndpointVector::new((0..s).map(|i| format!("SE{}", i + 1))).map_err(err)?;
    let plan = round_robin(m, &ev).map_err(err)?;
    let endpoints = ev
        .ids()
        .iter()
        .map(|id| EndpointLayout {
            id: id.clone(),
            chunks: plan.chunks_on(id),
        })
        .collect();
    to_js(&Layout {
        k,
        m,
        endpoints,
        placed_availability: placement_availability(p, k, &plan, &ev).map_err(err)?,
        spread_availability: analysis::binomial_tail(m, k, p),
    })
}

#[derive(Serialize)]
struct ScalingPoint {
    threads: usize,
    put_s: f64,
    put_encode_s: f64,
    get_s: f64,
}

/// Virtual upload and download times for T = 1..=max_threads on m uniform
/// endpoints with the given cost model. `codec_bandwidth` <= 0 makes
/// coding free.
#[wasm_bindgen]
pub fn scaling_curve(
    size_bytes: f64,
    k: usize,
    m: usize,
    max_threads: usize,
    setup_latency: f64,
    bandwidth: f64,
    codec_bandwidth: f64,
) -> Result<String, JsError> {
    let params = CodingParams::new(k, m).map_err(err)?;
    let cost = CostModel::new(setup_latency, bandwidth).map_err(err)?;
    if !(size_bytes >= 0.0) || max_threads == 0 || max_threads > 64 {
        return Err(JsError::new("need size >= 0 and 1 <= max_threads <= 64"));
    }
    let size = size_bytes as u64;
    let scale = size.div_ceil(MAX_REAL_BYTES).max(1);
    let data: Vec<u8> = (0..size / scale).map(|i| (i * 131 % 251) as u8).collect();
    let exec = if codec_bandwidth > 0.0 {
        VirtualExecutor::new(codec_bandwidth)
    } else {
        VirtualExecutor::free_codec()
    };
    let descriptors: Vec<EndpointDescriptor> = (0..m)
        .map(|i| EndpointDescriptor::simulated(format!("SE{}", i + 1), cost, 0.0, i as u64))
        .collect();

    let mut points = Vec::with_capacity(max_threads);
    for threads in 1..=max_threads {
        let endpoints = Endpoints::from_descriptors(&descriptors, SimClock::with_byte_scale(scale)).map_err(err)?;
        let policy = TransferPolicy::new(threads, 0).map_err(err)?;
        let pipe = Pipeline::new(&endpoints, policy, &exec);
        let mut catalogue = Catalogue::in_memory();
        let put = pipe.put_file(&mut catalogue, &data, "/demo", params).map_err(err)?;
        let (_, get) = pipe.get_file(&catalogue, "/demo").map_err(err)?;
        points.push(ScalingPoint {
            threads,
            put_s: put.total_s,
            put_encode_s: put.codec_s,
            get_s: get.total_s,
        });
    }
    to_js(&points)
}

/// The committed cost model as `[setup_latency, bandwidth]`.
#[wasm_bindgen]
pub fn fitted_cost_model() -> Vec<f64> {
    let c = analysis::fitted_cost_model();
    vec![c.setup_latency, c.bandwidth]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_endpoints() {
        let v: serde_json::Value = serde_json::from_str(&availability_curve(10, 15, 2, 0.5, 6).unwrap()).unwrap();
        let pts = v["points"].as_array().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[5]["erasure"], 1.0);
        assert_eq!(v["erasure_label"], "ec10+5");
    }

    #[test]
    fn layout_matches_round_robin() {
        let v: serde_json::Value = serde_json::from_str(&placement_layout(7, 10, 3, 0.9).unwrap()).unwrap();
        assert_eq!(v["endpoints"][0]["chunks"], serde_json::json!([0, 3, 6, 9]));
        let placed = v["placed_availability"].as_f64().unwrap();
        assert!((placed - 0.891).abs() < 1e-12);
    }

    #[test]
    fn scaling_is_non_increasing_for_get() {
        let v: serde_json::Value =
            serde_json::from_str(&scaling_curve(2.4e9, 10, 15, 15, 5.5, 16.75e6, 50e6).unwrap()).unwrap();
        let gets: Vec<f64> = v.as_array().unwrap().iter().map(|p| p["get_s"].as_f64().unwrap()).collect();
        assert!(gets.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }
}
