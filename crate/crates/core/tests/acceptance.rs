//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (no libtest harness) so the lines appear in
//! `cargo test` output; exits non-zero if any criterion fails.

mod common;

use std::fmt::Write as _;
use std::time::Instant;

use common::{binomial, gf_mul_oracle, k_subsets, pseudo_random, zfec_names, zfec_share_payload};
use ecstore::analysis::{
    self, calibration, file_availability, overhead_resilience_table, AvailabilityModel, BenchCase, BenchScenario,
    Scheme,
};
use ecstore::catalogue::Catalogue;
use ecstore::codec::{self, format_share_name, gf_mul, Chunk, CodingParams};
use ecstore::endpoint::{BackendConfig, CostModel, EndpointDescriptor, Endpoints, SimClock};
use ecstore::placement::{round_robin, EndpointVector};
use ecstore::transfer::{Direction, Pipeline, TransferError, TransferPolicy, VirtualExecutor};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn codec_correctness() -> Check {
    let start = Instant::now();
    let mut decodes = 0usize;
    for (k, m) in [(1, 1), (2, 3), (4, 8), (10, 15)] {
        let params = CodingParams::new(k, m).unwrap();
        let subsets = k_subsets(m, k);
        ensure!(subsets.len() == binomial(m, k) && subsets.len() <= 3003, "subset count for ({k},{m})");
        for (si, len) in [0, 1, k - 1, 4096, 1 << 20].into_iter().enumerate() {
            let data = pseudo_random(len, (k * 100 + m) as u64 * 10 + si as u64);
            let chunks = codec::encode(&data, params).map_err(|e| e.to_string())?;
            for subset in &subsets {
                let chosen: Vec<&Chunk> = subset.iter().map(|&i| &chunks[i]).collect();
                let back = codec::decode(&chosen).map_err(|e| e.to_string())?;
                ensure!(back == data, "({k},{m}) len {len} subset {subset:?} decoded wrongly");
                decodes += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1} s");
    Ok(format!("{decodes} exhaustive subset decodes in {secs:.2} s"))
}

fn gf_oracle() -> Check {
    let start = Instant::now();
    for a in 0..=255u8 {
        for b in 0..=255u8 {
            ensure!(gf_mul(a, b) == gf_mul_oracle(a, b), "mismatch at {a} * {b}");
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 5.0, "took {secs:.2} s");
    Ok(format!("65536 pairs match in {secs:.3} s"))
}

fn zfec_naming() -> Check {
    let mut checked = 0;
    for (k, m, name) in zfec_names().into_iter().filter(|(k, m, _)| (*k, *m) == (10, 15)) {
        let idx: usize = name
            .trim_start_matches("data.bin.")
            .split('_')
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("unparseable fixture {name}"))?;
        let ours = format_share_name("data.bin", idx, m).map_err(|e| e.to_string())?;
        ensure!(ours == name, "k={k}: {ours} != {name}");
        checked += 1;
    }
    ensure!(checked == 15, "expected 15 fixture names, found {checked}");
    // The reference shares also agree byte for byte.
    let input = std::fs::read(common::fixture_dir().join("padded.bin")).map_err(|e| e.to_string())?;
    for chunk in codec::encode(&input, CodingParams::new(10, 15).unwrap()).map_err(|e| e.to_string())? {
        let name = codec::chunk_filename("padded.bin", &chunk.header).map_err(|e| e.to_string())?;
        ensure!(chunk.payload == zfec_share_payload(&name, input.len(), 10), "payload of {name} differs");
    }
    Ok("15 names and 15 share payloads match the reference tool".into())
}

fn placement() -> Check {
    let ev = EndpointVector::new(["A", "B", "C"]).unwrap();
    let plan = round_robin(10, &ev).map_err(|e| e.to_string())?;
    ensure!(plan.chunks_on("A") == [0, 3, 6, 9], "A got {:?}", plan.chunks_on("A"));
    ensure!(plan.chunks_on("B") == [1, 4, 7], "B got {:?}", plan.chunks_on("B"));
    ensure!(plan.chunks_on("C") == [2, 5, 8], "C got {:?}", plan.chunks_on("C"));
    let mut grids = 0;
    for s in 1..=10 {
        let ev = EndpointVector::new((0..s).map(|i| format!("e{i}"))).unwrap();
        for m in 1..=30 {
            let counts = round_robin(m, &ev).map_err(|e| e.to_string())?.counts(&ev);
            ensure!(counts.iter().sum::<usize>() == m, "m={m} s={s} lost chunks");
            ensure!(counts.windows(2).all(|w| w[0] >= w[1]), "m={m} s={s} surplus not at front: {counts:?}");
            ensure!(counts[0] - counts[s - 1] <= 1, "m={m} s={s} unbalanced: {counts:?}");
            grids += 1;
        }
    }
    Ok(format!("three-endpoint layout exact; {grids} (m, s) grids balanced"))
}

fn uniform_descriptors(n: usize, cost: CostModel) -> Vec<EndpointDescriptor> {
    (0..n)
        .map(|i| EndpointDescriptor::simulated(format!("se{i:02}"), cost, 0.0, i as u64 + 1))
        .collect()
}

fn early_stop() -> Check {
    let cost = calibration::fitted_cost_model();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut descriptors = uniform_descriptors(15, cost);
    for d in &mut descriptors {
        if let BackendConfig::Simulated { root, .. } = &mut d.backend {
            *root = Some(dir.path().join(&d.id));
        }
    }
    let exec = VirtualExecutor::free_codec();
    let params = CodingParams::new(10, 15).unwrap();
    let data = pseudo_random(100_000, 5);
    let mut cat = Catalogue::in_memory();
    let healthy = Endpoints::from_descriptors(&descriptors, SimClock::new()).map_err(|e| e.to_string())?;
    let pipe = Pipeline::new(&healthy, TransferPolicy::default(), &exec);
    pipe.put_file(&mut cat, &data, "/f", params).map_err(|e| e.to_string())?;
    let (back, report) = pipe.get_file(&cat, "/f").map_err(|e| e.to_string())?;
    ensure!(back == data, "healthy get returned wrong data");
    ensure!(report.dispatched == 10, "healthy T=1 get dispatched {}", report.dispatched);

    // Take down the endpoints holding data chunks 0-4.
    for d in descriptors.iter_mut().take(5) {
        if let BackendConfig::Simulated { failure_probability, .. } = &mut d.backend {
            *failure_probability = 1.0;
        }
    }
    let degraded = Endpoints::from_descriptors(&descriptors, SimClock::new()).map_err(|e| e.to_string())?;
    let pipe = Pipeline::new(&degraded, TransferPolicy::default(), &exec);
    let (back, report) = pipe.get_file(&cat, "/f").map_err(|e| e.to_string())?;
    ensure!(back == data, "degraded get returned wrong data");
    ensure!(report.recovered_chunks == Some(5), "recovered {:?}", report.recovered_chunks);
    Ok(format!(
        "healthy: 10 fetches dispatched; chunks 0-4 down: succeeded with {} dispatches",
        report.dispatched
    ))
}

fn upload_timings() -> Check {
    let start = Instant::now();
    let t = analysis::reproduce_upload_timings(calibration::fitted_cost_model()).map_err(|e| e.to_string())?;
    let mut detail = String::new();
    let mut bad = Vec::new();
    for (name, got, want, dev) in calibration::relative_deviations(&t) {
        let _ = write!(detail, "{name} {got:.2}/{want} ({:+.1}%); ", dev * 100.0);
        if dev.abs() > 0.10 {
            bad.push(name);
        }
    }
    ensure!(bad.is_empty(), "outside 10%: {bad:?}; {detail}");
    ensure!(t.small_split_total > t.small_whole, "small split total not above whole");
    ensure!(t.large_split_total > t.large_whole, "large split total not above whole");
    ensure!(
        (t.small_split_per_piece - t.small_whole).abs() / t.small_whole < 0.10,
        "small per-piece not close to whole"
    );
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.1} s");
    Ok(detail.trim_end_matches("; ").to_string())
}

fn scaling() -> Check {
    let cost = calibration::fitted_cost_model();
    let descriptors = uniform_descriptors(15, cost);
    let params = CodingParams::new(10, 15).unwrap();
    let scale = calibration::LARGE_BYTE_SCALE;
    let data = pseudo_random((calibration::LARGE_FILE_BYTES / scale) as usize, 9);
    let exec = VirtualExecutor::new(50e6);
    let chunk_bytes = (params.chunk_len(data.len()) + codec::HEADER_LEN) as u64 * scale;
    let per_chunk = cost.cost(chunk_bytes);

    let mut get_times = Vec::new();
    let mut encode_times = Vec::new();
    let mut put15_transfer = 0.0;
    for t in 1..=15 {
        let eps = Endpoints::from_descriptors(&descriptors, SimClock::with_byte_scale(scale)).map_err(|e| e.to_string())?;
        let pipe = Pipeline::new(&eps, TransferPolicy::new(t, 0).unwrap(), &exec);
        let mut cat = Catalogue::in_memory();
        let put = pipe.put_file(&mut cat, &data, "/big", params).map_err(|e| e.to_string())?;
        ensure!(
            (put.total_s - (put.codec_s + put.transfer_s)).abs() < 1e-6,
            "T={t}: put {} != encode {} + transfer {}",
            put.total_s,
            put.codec_s,
            put.transfer_s
        );
        encode_times.push(put.codec_s);
        if t == 15 {
            put15_transfer = put.transfer_s;
        }
        let (_, get) = pipe.get_file(&cat, "/big").map_err(|e| e.to_string())?;
        get_times.push(get.total_s);
    }
    ensure!(
        get_times.windows(2).all(|w| w[1] <= w[0] + 1e-9),
        "get time increases somewhere: {get_times:?}"
    );
    ensure!(
        encode_times.iter().all(|&e| (e - encode_times[0]).abs() < 1e-9),
        "encode time varies with T"
    );
    ensure!(
        put15_transfer <= 1.05 * per_chunk,
        "T=15 transfer {put15_transfer:.2} s vs per-chunk {per_chunk:.2} s"
    );
    Ok(format!(
        "get {:.1} s (T=1) to {:.1} s (T=15), non-increasing; put = {:.1} s encode + transfer, T=15 transfer {:.2} s vs chunk {:.2} s",
        get_times[0], get_times[14], encode_times[0], put15_transfer, per_chunk
    ))
}

fn availability() -> Check {
    let p = 0.9_f64;
    // Oracle: enumerate all 2^15 up/down states of 15 endpoints.
    let mut oracle = 0.0_f64;
    for state in 0u32..(1 << 15) {
        let up = state.count_ones() as i32;
        if up >= 10 {
            oracle += p.powi(up) * (1.0 - p).powi(15 - up);
        }
    }
    let model = file_availability(&AvailabilityModel::new(p, Scheme::Erasure { k: 10, m: 15 })).map_err(|e| e.to_string())?;
    ensure!((model - oracle).abs() < 1e-12, "ec(10,15) {model} vs oracle {oracle}");
    let rep2 = file_availability(&AvailabilityModel::new(p, Scheme::Replication { r: 2 })).map_err(|e| e.to_string())?;
    ensure!(rep2 == 0.99, "replication 2 gave {rep2}");
    let table = overhead_resilience_table(p, &analysis::default_schemes()).map_err(|e| e.to_string())?;
    let witness = table
        .iter()
        .find(|r| matches!(r.scheme, Scheme::Erasure { .. }) && r.overhead < 2.0 && r.availability > 0.99)
        .ok_or("no erasure scheme beats replication 2 below overhead 2")?;
    Ok(format!(
        "ec10+5 = {model:.12} (oracle {oracle:.12}); rep2 = 0.99; {} overhead {:.2} availability {:.6}",
        witness.label, witness.overhead, witness.availability
    ))
}

fn failure_semantics() -> Check {
    let cost = CostModel::new(1.0, 1e7).unwrap();
    let mut descriptors = uniform_descriptors(5, cost);
    if let BackendConfig::Simulated { failure_probability, .. } = &mut descriptors[2].backend {
        *failure_probability = 1.0;
    }
    let params = CodingParams::new(3, 5).unwrap();
    let data = pseudo_random(30_000, 3);
    let exec = VirtualExecutor::free_codec();

    let eps = Endpoints::from_descriptors(&descriptors, SimClock::new()).map_err(|e| e.to_string())?;
    let pipe = Pipeline::new(&eps, TransferPolicy::new(1, 0).unwrap(), &exec);
    let mut cat = Catalogue::in_memory();
    match pipe.put_file(&mut cat, &data, "/f", params) {
        Err(TransferError::UploadFailed { .. }) => {}
        other => return Err(format!("retries 0: expected upload failure, got {other:?}")),
    }
    ensure!(cat.list_files("/").is_empty(), "catalogue not empty after failed put");
    for ep in eps.iter() {
        let objs = ep.objects().map_err(|e| e.to_string())?;
        ensure!(objs.is_empty(), "orphans on {}: {objs:?}", ep.id());
    }

    let eps = Endpoints::from_descriptors(&descriptors, SimClock::new()).map_err(|e| e.to_string())?;
    let pipe = Pipeline::new(&eps, TransferPolicy::new(1, 1).unwrap(), &exec);
    pipe.put_file(&mut cat, &data, "/f", params).map_err(|e| format!("retries 1: {e}"))?;
    let manifest = cat.lookup("/f").map_err(|e| e.to_string())?;
    let moved = manifest.location(2).ok_or("chunk 2 missing from manifest")?;
    ensure!(moved.endpoint_id == "se03", "chunk 2 recorded on {}", moved.endpoint_id);
    let (back, _) = pipe.get_file(&cat, "/f").map_err(|e| e.to_string())?;
    ensure!(back == data, "retrieved data differs");
    Ok("retries 0: failed, unregistered, no orphans; retries 1: chunk 2 rotated to se03 and file reads back".into())
}

fn full_run() -> Result<String, String> {
    let cost = calibration::fitted_cost_model();
    let mut descriptors = uniform_descriptors(6, cost);
    if let BackendConfig::Simulated { failure_probability, .. } = &mut descriptors[4].backend {
        *failure_probability = 0.3;
    }
    let exec = VirtualExecutor::new(40e6);
    let eps = Endpoints::from_descriptors(&descriptors, SimClock::with_byte_scale(100)).map_err(|e| e.to_string())?;
    let pipe = Pipeline::new(&eps, TransferPolicy::new(3, 2).unwrap(), &exec);
    let mut cat = Catalogue::in_memory();
    let data = pseudo_random(200_000, 77);
    let mut out = String::new();
    let put = pipe.put_file(&mut cat, &data, "/d/file", CodingParams::new(4, 7).unwrap());
    let _ = writeln!(out, "{}", put.map(|r| serde_json::to_string(&r).unwrap()).unwrap_or_else(|e| e.to_string()));
    let get = pipe.get_file(&cat, "/d/file");
    let _ = writeln!(
        out,
        "{}",
        get.map(|(_, r)| serde_json::to_string(&r).unwrap()).unwrap_or_else(|e| e.to_string())
    );
    let scenario = BenchScenario {
        name: "determinism".into(),
        rng_seed: 1234,
        repetitions: 2,
        byte_scale: 1000,
        codec_bandwidth: Some(50e6),
        directions: vec![Direction::Put, Direction::Get],
        threads: vec![1, 3, 5],
        cases: vec![BenchCase {
            label: None,
            size_bytes: 50_000_000,
            k: 5,
            m: 8,
        }],
        endpoints: descriptors,
        wall_clock: false,
    };
    let bench = analysis::run_bench(&scenario).map_err(|e| e.to_string())?;
    out.push_str(&analysis::bench::csv_string(&bench.rows));
    Ok(out)
}

fn determinism() -> Check {
    let a = full_run()?;
    let b = full_run()?;
    ensure!(a == b, "outputs differ between executions");
    Ok(format!("two executions produced identical output ({} bytes)", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("codec correctness", codec_correctness),
        ("GF oracle equivalence", gf_oracle),
        ("zfec naming", zfec_naming),
        ("placement", placement),
        ("early stop", early_stop),
        ("upload timing table", upload_timings),
        ("scaling shape", scaling),
        ("availability", availability),
        ("failure semantics", failure_semantics),
        ("end-to-end determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  criterion {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
