//! Scenario-driven transfer benchmarks.
//!
//! Each measurement (case, thread count, repetition) builds fresh endpoints,
//! a fresh clock and an in-memory catalogue, uploads one file and optionally
//! downloads it again. On simulated endpoints all times are virtual, so the
//! output depends only on the scenario.
//!
//! CSV schema, one row per measurement and direction:
//!
//! ```text
//! direction,size_bytes,k,m,threads,rep,total_s,avg_chunk_s,chunks_fetched
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::catalogue::Catalogue;
use crate::codec::CodingParams;
use crate::endpoint::{BackendConfig, EndpointDescriptor, Endpoints, SimClock};
use crate::transfer::{Direction, Executor, Pipeline, ThreadExecutor, TransferError, TransferPolicy, TransferReport, VirtualExecutor};

pub const CSV_HEADER: [&str; 9] = [
    "direction",
    "size_bytes",
    "k",
    "m",
    "threads",
    "rep",
    "total_s",
    "avg_chunk_s",
    "chunks_fetched",
];

const BENCH_PATH: &str = "/bench/file.bin";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCase {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Nominal file size; the real buffer is `size_bytes / byte_scale`.
    pub size_bytes: u64,
    pub k: usize,
    pub m: usize,
}

impl BenchCase {
    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| format!("{}b_{}of{}", self.size_bytes, self.k, self.m))
    }
}

fn default_one() -> usize {
    1
}

fn default_scale() -> u64 {
    1
}

fn default_directions() -> Vec<Direction> {
    vec![Direction::Put, Direction::Get]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchScenario {
    pub name: String,
    pub rng_seed: u64,
    #[serde(default = "default_one")]
    pub repetitions: usize,
    /// Nominal bytes per real byte moved.
    #[serde(default = "default_scale")]
    pub byte_scale: u64,
    /// Virtual encode/decode throughput in nominal bytes per second; free
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codec_bandwidth: Option<f64>,
    #[serde(default = "default_directions")]
    pub directions: Vec<Direction>,
    pub threads: Vec<usize>,
    #[serde(rename = "case")]
    pub cases: Vec<BenchCase>,
    #[serde(rename = "endpoint")]
    pub endpoints: Vec<EndpointDescriptor>,
    /// Allow non-simulated endpoints, timed by wall clock.
    #[serde(default)]
    pub wall_clock: bool,
}

impl BenchScenario {
    pub fn parse(text: &str) -> Result<Self, AnalysisError> {
        let s: BenchScenario = toml::from_str(text).map_err(|e| AnalysisError::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    /// Read a scenario file; relative endpoint roots resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, AnalysisError> {
        let text = fs::read_to_string(path).map_err(|e| AnalysisError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut s = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut s.endpoints {
            d.resolve_relative(base);
        }
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |msg: String| Err(AnalysisError::Scenario(msg));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.byte_scale == 0 {
            return bad("byte_scale must be at least 1".into());
        }
        if self.threads.is_empty() || self.threads.contains(&0) {
            return bad("threads must list positive worker counts".into());
        }
        if self.directions.is_empty() {
            return bad("no directions selected".into());
        }
        if self.cases.is_empty() {
            return bad("no cases".into());
        }
        if let Some(bw) = self.codec_bandwidth {
            if !(bw > 0.0) {
                return bad(format!("codec_bandwidth must be positive, got {bw}"));
            }
        }
        for c in &self.cases {
            CodingParams::new(c.k, c.m).map_err(|e| AnalysisError::Scenario(format!("case {}: {e}", c.label())))?;
        }
        crate::endpoint::EndpointConfig {
            endpoints: self.endpoints.clone(),
        }
        .validate()
        .map_err(|e| AnalysisError::Scenario(e.to_string()))?;
        if !self.wall_clock {
            if let Some(d) = self.endpoints.iter().find(|d| !d.is_simulated()) {
                return bad(format!(
                    "endpoint {} is not simulated; set wall_clock = true to time real endpoints",
                    d.id
                ));
            }
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub direction: Direction,
    pub size_bytes: u64,
    pub k: usize,
    pub m: usize,
    pub threads: usize,
    pub rep: usize,
    pub total_s: f64,
    pub avg_chunk_s: f64,
    pub chunks_fetched: usize,
}

impl BenchRow {
    pub fn from_report(report: &TransferReport, size_bytes: u64, rep: usize) -> Self {
        BenchRow {
            direction: report.direction,
            size_bytes,
            k: report.params.k(),
            m: report.params.m(),
            threads: report.threads_used,
            rep,
            total_s: report.total_s,
            avg_chunk_s: report.avg_chunk_s(),
            chunks_fetched: report.chunks_fetched,
        }
    }

    fn record(&self) -> [String; 9] {
        [
            self.direction.to_string(),
            self.size_bytes.to_string(),
            self.k.to_string(),
            self.m.to_string(),
            self.threads.to_string(),
            self.rep.to_string(),
            format!("{:.6}", self.total_s),
            format!("{:.6}", self.avg_chunk_s),
            self.chunks_fetched.to_string(),
        ]
    }
}

/// A measurement that did not complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchFailure {
    pub direction: Direction,
    pub case: String,
    pub threads: usize,
    pub rep: usize,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub failures: Vec<BenchFailure>,
}

fn mix(mut x: u64) -> u64 {
    // splitmix64 finalizer
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn reseeded(endpoints: &[EndpointDescriptor], salt: u64) -> Vec<EndpointDescriptor> {
    endpoints
        .iter()
        .cloned()
        .map(|mut d| {
            if let BackendConfig::Simulated { rng_seed, .. } = &mut d.backend {
                *rng_seed = mix(*rng_seed ^ salt);
            }
            d
        })
        .collect()
}

/// Run every measurement in `scenario`.
pub fn run_bench(scenario: &BenchScenario) -> Result<BenchOutcome, AnalysisError> {
    scenario.validate()?;
    let mut out = BenchOutcome::default();
    let virtual_exec = match scenario.codec_bandwidth {
        Some(bw) => VirtualExecutor::new(bw),
        None => VirtualExecutor::free_codec(),
    };
    let executor: &dyn Executor = if scenario.wall_clock {
        &ThreadExecutor
    } else {
        &virtual_exec
    };
    let want_get = scenario.directions.contains(&Direction::Get);
    let want_put = scenario.directions.contains(&Direction::Put);

    for (ci, case) in scenario.cases.iter().enumerate() {
        let params = CodingParams::new(case.k, case.m)?;
        let real_len = case.size_bytes.div_ceil(scenario.byte_scale) as usize;
        let mut data = vec![0u8; real_len];
        ChaCha8Rng::seed_from_u64(mix(scenario.rng_seed ^ ci as u64)).fill_bytes(&mut data);

        for &threads in &scenario.threads {
            for rep in 0..scenario.repetitions {
                let salt = mix(scenario.rng_seed)
                    ^ mix((ci as u64) << 40 | (threads as u64) << 20 | rep as u64);
                let clock = SimClock::with_byte_scale(scenario.byte_scale);
                let endpoints = Endpoints::from_descriptors(&reseeded(&scenario.endpoints, salt), clock)?;
                let policy = TransferPolicy::new(threads, 0)?;
                let pipe = Pipeline::new(&endpoints, policy, executor);
                let mut catalogue = Catalogue::in_memory();
                let fail = |direction, e: &TransferError| BenchFailure {
                    direction,
                    case: case.label(),
                    threads,
                    rep,
                    error: e.to_string(),
                };

                match pipe.put_file(&mut catalogue, &data, BENCH_PATH, params) {
                    Ok(report) => {
                        if want_put {
                            out.rows.push(BenchRow::from_report(&report, case.size_bytes, rep));
                        }
                    }
                    Err(e) => {
                        out.failures.push(fail(Direction::Put, &e));
                        continue;
                    }
                }
                if want_get {
                    match pipe.get_file(&catalogue, BENCH_PATH) {
                        Ok((back, report)) => {
                            if back != data {
                                return Err(AnalysisError::Scenario(format!(
                                    "case {}: downloaded data differs from upload",
                                    case.label()
                                )));
                            }
                            out.rows.push(BenchRow::from_report(&report, case.size_bytes, rep));
                        }
                        Err(e) => out.failures.push(fail(Direction::Get, &e)),
                    }
                }
                let _ = pipe.remove_file(&mut catalogue, BENCH_PATH);
            }
        }
    }
    Ok(out)
}

pub fn write_csv<W: io::Write>(rows: &[BenchRow], writer: W) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush().map_err(|e| AnalysisError::Io {
        path: PathBuf::from("<csv>"),
        source: e,
    })?;
    Ok(())
}

pub fn csv_string(rows: &[BenchRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn read_csv<R: io::Read>(reader: R) -> Result<Vec<BenchRow>, AnalysisError> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(AnalysisError::Scenario(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(AnalysisError::from)).collect()
}

/// Mean `total_s` per thread count for one direction and case.
pub fn scaling_series(rows: &[BenchRow], direction: Direction, case: &BenchCase) -> Vec<(usize, f64)> {
    let mut threads: Vec<usize> = rows.iter().map(|r| r.threads).collect();
    threads.sort_unstable();
    threads.dedup();
    threads
        .into_iter()
        .filter_map(|t| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| {
                    r.direction == direction
                        && r.threads == t
                        && r.size_bytes == case.size_bytes
                        && r.k == case.k
                        && r.m == case.m
                })
                .map(|r| r.total_s)
                .collect();
            (!v.is_empty()).then(|| (t, v.iter().sum::<f64>() / v.len() as f64))
        })
        .collect()
}

/// Render `points` as a small SVG line chart.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let (w, h, pad) = (480.0, 320.0, 56.0);
    let x_max = points.iter().map(|p| p.0).fold(1.0, f64::max);
    let y_max = points.iter().map(|p| p.1).fold(0.0, f64::max).max(1e-9) * 1.1;
    let sx = |x: f64| pad + x / x_max * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - y / y_max * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{pad},{} V{} H{}" fill="none" stroke="black"/>"#,
        pad,
        h - pad,
        w - pad
    );
    for i in 0..=4 {
        let y = y_max * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.1}</text>"#, pad - 4.0, sy(y) + 4.0, y);
    }
    for &(x, _) in points {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, sx(x), h - pad + 14.0, x);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    let path: Vec<String> = points.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, path.join(" "));
    for &(x, y) in points {
        let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="steelblue"/>"#, sx(x), sy(y));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One scaling plot per direction and case, named `<direction>_<case>.svg`.
pub fn write_plots(scenario: &BenchScenario, rows: &[BenchRow], dir: &Path) -> Result<Vec<PathBuf>, AnalysisError> {
    fs::create_dir_all(dir).map_err(|e| AnalysisError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut written = Vec::new();
    for &direction in &scenario.directions {
        for case in &scenario.cases {
            let series = scaling_series(rows, direction, case);
            if series.is_empty() {
                continue;
            }
            let pts: Vec<(f64, f64)> = series.iter().map(|&(t, v)| (t as f64, v)).collect();
            let verb = match direction {
                Direction::Put => "upload",
                Direction::Get => "download",
            };
            let title = format!("{} {} ({} of {} chunks)", case.label(), verb, case.k, case.m);
            let svg = line_chart_svg(&title, "threads", "time (s)", &pts);
            let path = dir.join(format!("{}_{}.svg", direction, sanitize(&case.label())));
            fs::write(&path, svg).map_err(|e| AnalysisError::Io {
                path: path.clone(),
                source: e,
            })?;
            written.push(path);
        }
    }
    Ok(written)
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCENARIO: &str = r#"
name = "tiny"
rng_seed = 3
threads = [1, 2, 4]

[[case]]
label = "small"
size_bytes = 4000
k = 4
m = 6

[[endpoint]]
id = "a"
backend = "simulated"
setup_latency = 1.0
bandwidth = 1e6

[[endpoint]]
id = "b"
backend = "simulated"
setup_latency = 1.0
bandwidth = 1e6
"#;

    #[test]
    fn runs_and_round_trips_csv() {
        let s = BenchScenario::parse(SCENARIO).unwrap();
        let out = run_bench(&s).unwrap();
        assert!(out.failures.is_empty());
        assert_eq!(out.rows.len(), 6);
        let text = csv_string(&out.rows);
        assert!(text.starts_with("direction,size_bytes,k,m,threads,rep,total_s,avg_chunk_s,chunks_fetched\n"));
        let back = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.len(), 6);
        assert_eq!(csv_string(&back), text);
        let get = scaling_series(&out.rows, Direction::Get, &s.cases[0]);
        assert_eq!(get.len(), 3);
        assert!(get.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn rejects_real_endpoints_without_wall_clock() {
        let text = SCENARIO.replace(
            "id = \"b\"\nbackend = \"simulated\"\nsetup_latency = 1.0\nbandwidth = 1e6",
            "id = \"b\"\nbackend = \"local-dir\"\nroot = \"x\"",
        );
        assert!(matches!(BenchScenario::parse(&text), Err(AnalysisError::Scenario(_))));
    }
}
