mod config;
mod error;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ecstore::analysis::{self, bench, AvailabilityModel, BenchScenario, Scheme};
use ecstore::catalogue::Catalogue;
use ecstore::codec::{CodingParams, FORMAT_VERSION};
use ecstore::endpoint::{Endpoints, SimClock};
use ecstore::transfer::{
    ChunkHealth, Executor, Pipeline, ThreadExecutor, TransferPolicy, TransferReport, VerifyReport, VirtualExecutor,
};
use serde::Serialize;
use serde_json::{json, Value};

use config::{CliConfig, InitBackend};
use error::{code, CliError};

#[derive(Debug, Parser)]
#[command(name = "ecstore", version, about = "Erasure-coded file store over a set of storage endpoints")]
struct Cli {
    /// Configuration file [default: $ECSTORE_CONFIG, then ./ecstore.toml]
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print one JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct TransferArgs {
    /// Worker threads.
    #[arg(long, short = 't')]
    threads: Option<usize>,
    /// Extra attempts per chunk after a failed transfer.
    #[arg(long)]
    retries: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Local,
    Simulated,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a starter ecstore.toml and endpoints.toml.
    Init {
        /// Directory to initialise.
        #[arg(default_value = ".")]
        dir: PathBuf,
        #[arg(long, default_value_t = 15)]
        endpoints: usize,
        #[arg(long, value_enum, default_value_t = BackendArg::Simulated)]
        backend: BackendArg,
    },
    /// Encode a local file and upload its chunks.
    Put {
        local: PathBuf,
        logical: String,
        /// Data chunks (k).
        #[arg(long)]
        split: Option<usize>,
        /// Coding chunks added to the data chunks (m = k + coding).
        #[arg(long)]
        coding: Option<usize>,
        #[command(flatten)]
        transfer: TransferArgs,
    },
    /// Fetch and decode a stored file.
    Get {
        logical: String,
        local: PathBuf,
        #[command(flatten)]
        transfer: TransferArgs,
        /// Queue every chunk at once and keep the fastest k.
        #[arg(long)]
        fetch_all: bool,
    },
    /// List stored files.
    Ls {
        #[arg(default_value = "/")]
        prefix: String,
    },
    /// Unregister a file and delete its chunks.
    Rm { logical: String },
    /// Check every chunk of a stored file.
    Verify { logical: String },
    /// Compare availability and storage overhead of redundancy schemes.
    Avail {
        /// Probability that any one endpoint is up.
        #[arg(long, default_value_t = 0.9)]
        p: f64,
        /// Comma-separated schemes, e.g. rep2,ec10+5,ec10/12.
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<String>,
        /// Reject schemes needing more than this many endpoints.
        #[arg(long)]
        endpoints: Option<usize>,
    },
    /// Run a benchmark scenario and write CSV (and plots).
    Bench {
        scenario: PathBuf,
        /// Output directory for bench.csv and SVG plots; CSV goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_plots: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Init { .. } => "init",
            Command::Put { .. } => "put",
            Command::Get { .. } => "get",
            Command::Ls { .. } => "ls",
            Command::Rm { .. } => "rm",
            Command::Verify { .. } => "verify",
            Command::Avail { .. } => "avail",
            Command::Bench { .. } => "bench",
        }
    }
}

/// Result of one command: JSON payload plus the text rendering.
struct Output {
    json: Value,
    text: String,
    /// Non-zero exit despite producing a result (verify).
    code: i32,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Output { json, text, code: code::OK }
    }
}

struct Store {
    config: CliConfig,
    endpoints: Endpoints,
}

impl Store {
    fn open(flag: Option<&Path>) -> Result<Self, CliError> {
        let path = CliConfig::locate(flag);
        let config = CliConfig::load(&path)?;
        let descriptors = config.endpoint_config()?.endpoints;
        let endpoints = Endpoints::from_descriptors(&descriptors, SimClock::new())?;
        Ok(Store { config, endpoints })
    }

    fn catalogue(&self) -> Result<Catalogue, CliError> {
        Ok(Catalogue::open(&self.config.catalogue)?)
    }

    fn policy(&self, args: &TransferArgs) -> Result<TransferPolicy, CliError> {
        let d = &self.config.defaults;
        Ok(TransferPolicy::new(args.threads.unwrap_or(d.threads), args.retries.unwrap_or(d.retries))?)
    }

    fn with_pipeline<T>(&self, policy: TransferPolicy, f: impl FnOnce(Pipeline<'_>) -> T) -> T {
        let virt = match self.config.defaults.codec_bandwidth {
            Some(bw) => VirtualExecutor::new(bw),
            None => VirtualExecutor::free_codec(),
        };
        let exec: &dyn Executor = if self.endpoints.all_simulated() { &virt } else { &ThreadExecutor };
        f(Pipeline::new(&self.endpoints, policy, exec))
    }
}

fn time_label(r: &TransferReport) -> &'static str {
    match r.time_base {
        ecstore::transfer::TimeBase::Virtual => "virtual",
        ecstore::transfer::TimeBase::Wall => "wall",
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    let cfg = cli.config.as_deref();
    match &cli.command {
        Command::Init { dir, endpoints, backend } => {
            let backend = match backend {
                BackendArg::Local => InitBackend::Local,
                BackendArg::Simulated => InitBackend::Simulated,
            };
            let path = config::write_starter(dir, *endpoints, backend, analysis::fitted_cost_model())?;
            Ok(Output::ok(
                json!({ "config": path, "endpoints": endpoints }),
                format!("wrote {} with {endpoints} endpoints", path.display()),
            ))
        }
        Command::Put {
            local,
            logical,
            split,
            coding,
            transfer,
        } => {
            let store = Store::open(cfg)?;
            let d = &store.config.defaults;
            let params = CodingParams::with_coding(split.unwrap_or(d.split), coding.unwrap_or(d.coding))?;
            let policy = store.policy(transfer)?;
            let data = fs::read(local).map_err(|e| CliError::Io(format!("{}: {e}", local.display())))?;
            let mut cat = store.catalogue()?;
            let report = store.with_pipeline(policy, |p| p.put_file(&mut cat, &data, logical, params))?;
            let endpoints_used: std::collections::BTreeSet<&str> =
                report.chunks.iter().map(|c| c.endpoint_id.as_str()).collect();
            let text = format!(
                "stored {logical}: {} bytes as {} chunks ({params}) on {} endpoints\n\
                 total {:.3} s {} (encode {:.3} s, transfer {:.3} s), {} transfers, {} threads",
                report.size_bytes,
                report.chunks_fetched,
                endpoints_used.len(),
                report.total_s,
                time_label(&report),
                report.codec_s,
                report.transfer_s,
                report.dispatched,
                report.threads_used
            );
            Ok(Output::ok(to_json(&report), text))
        }
        Command::Get {
            logical,
            local,
            transfer,
            fetch_all,
        } => {
            let store = Store::open(cfg)?;
            let mut policy = store.policy(transfer)?;
            policy.fetch_all = *fetch_all;
            let cat = store.catalogue()?;
            let report = store.with_pipeline(policy, |p| p.get_to_path(&cat, logical, local))?;
            let text = format!(
                "retrieved {logical} -> {}: {} bytes from {} of {} chunks ({} rebuilt)\n\
                 total {:.3} s {} (transfer {:.3} s, decode {:.3} s), {} transfers",
                local.display(),
                report.size_bytes,
                report.chunks_fetched,
                report.params.m(),
                report.recovered_chunks.unwrap_or(0),
                report.total_s,
                time_label(&report),
                report.transfer_s,
                report.codec_s,
                report.dispatched
            );
            Ok(Output::ok(to_json(&report), text))
        }
        Command::Ls { prefix } => {
            let store = Store::open(cfg)?;
            let cat = store.catalogue()?;
            let mut rows = Vec::new();
            let mut text = String::new();
            for path in cat.list_files(prefix) {
                match cat.lookup(&path) {
                    Ok(m) => {
                        text.push_str(&format!("{:>12}  {:<7} {path}\n", m.original_size, m.params.to_string()));
                        rows.push(json!({
                            "logical_path": path,
                            "size_bytes": m.original_size,
                            "k": m.params.k(),
                            "m": m.params.m(),
                        }));
                    }
                    Err(e) => {
                        text.push_str(&format!("{:>12}  {:<7} {path}  ({e})\n", "?", "?"));
                        rows.push(json!({ "logical_path": path, "error": e.to_string() }));
                    }
                }
            }
            Ok(Output::ok(Value::Array(rows), text.trim_end().to_string()))
        }
        Command::Rm { logical } => {
            let store = Store::open(cfg)?;
            let mut cat = store.catalogue()?;
            let report = store.with_pipeline(TransferPolicy::default(), |p| p.remove_file(&mut cat, logical))?;
            let mut text = format!("removed {logical}: deleted {} chunks", report.deleted);
            for f in &report.failures {
                text.push_str(&format!("\n  chunk {} on {}: {}", f.chunk_index, f.endpoint_id, f.error));
            }
            Ok(Output::ok(
                json!({ "logical_path": logical, "deleted": report.deleted, "failures": report.failures }),
                text,
            ))
        }
        Command::Verify { logical } => {
            let store = Store::open(cfg)?;
            let cat = store.catalogue()?;
            let report = store.with_pipeline(TransferPolicy::default(), |p| p.verify_file(&cat, logical))?;
            Ok(verify_output(&report))
        }
        Command::Avail { p, schemes, endpoints } => {
            let schemes: Vec<Scheme> = if schemes.is_empty() {
                analysis::default_schemes()
            } else {
                schemes.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
            };
            if let Some(n) = endpoints {
                for s in &schemes {
                    analysis::file_availability(&AvailabilityModel::new(*p, *s).with_endpoints(*n))?;
                }
            }
            let rows = analysis::overhead_resilience_table(*p, &schemes)?;
            let mut text = format!("{:<10} {:>8} {:>14} {:>8}\n", "scheme", "overhead", "availability", "losses");
            for r in &rows {
                text.push_str(&format!(
                    "{:<10} {:>8.3} {:>14.10} {:>8}\n",
                    r.label, r.overhead, r.availability, r.tolerated_losses
                ));
            }
            Ok(Output::ok(json!({ "p": p, "rows": rows }), text.trim_end().to_string()))
        }
        Command::Bench { scenario, out, no_plots } => {
            let s = BenchScenario::load(scenario)?;
            let outcome = analysis::run_bench(&s)?;
            let csv = bench::csv_string(&outcome.rows);
            let mut files = Vec::new();
            let mut text = String::new();
            match out {
                Some(dir) => {
                    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                    let path = dir.join("bench.csv");
                    fs::write(&path, &csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    files.push(path);
                    if !no_plots {
                        files.extend(bench::write_plots(&s, &outcome.rows, dir)?);
                    }
                    text.push_str(&format!("{}: {} rows", s.name, outcome.rows.len()));
                    for f in &files {
                        text.push_str(&format!("\n  wrote {}", f.display()));
                    }
                }
                None => text.push_str(csv.trim_end()),
            }
            for f in &outcome.failures {
                text.push_str(&format!(
                    "\n  failed: {} {} threads={} rep={}: {}",
                    f.direction, f.case, f.threads, f.rep, f.error
                ));
            }
            Ok(Output::ok(
                json!({ "scenario": s.name, "rows": outcome.rows, "failures": outcome.failures, "files": files }),
                text,
            ))
        }
    }
}

fn verify_output(report: &VerifyReport) -> Output {
    let mut text = String::new();
    for c in &report.chunks {
        let health = match c.health {
            ChunkHealth::Healthy => "ok",
            ChunkHealth::Missing => "missing",
            ChunkHealth::Corrupt => "corrupt",
            ChunkHealth::Unreachable => "unreachable",
        };
        text.push_str(&format!("  chunk {:>3} {:<12} {:<12} {}", c.chunk_index, c.endpoint_id, health, c.remote_name));
        if let (ChunkHealth::Corrupt | ChunkHealth::Unreachable, Some(d)) = (c.health, &c.detail) {
            text.push_str(&format!(" ({d})"));
        }
        text.push('\n');
    }
    let (verdict, code) = if !report.recoverable {
        ("NOT RECOVERABLE", code::NOT_RECOVERABLE)
    } else if report.consistent == Some(false) {
        ("INCONSISTENT", code::CORRUPTION)
    } else if report.healthy < report.m {
        ("DEGRADED", code::OK)
    } else {
        ("OK", code::OK)
    };
    text.push_str(&format!(
        "{}: {verdict}, {} of {} chunks healthy, {} needed",
        report.logical_path, report.healthy, report.m, report.k
    ));
    Output {
        json: to_json(report),
        text,
        code,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { code::USAGE as u8 } else { code::OK as u8 });
        }
    };
    let command = cli.command.name();
    let result = run(&cli);
    let mut stdout = std::io::stdout().lock();
    let exit = match result {
        Ok(out) => {
            if cli.json {
                let doc = json!({
                    "command": command,
                    "format_version": FORMAT_VERSION,
                    "ok": out.code == code::OK,
                    "result": out.json,
                });
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("json"));
            } else if !out.text.is_empty() {
                let _ = writeln!(stdout, "{}", out.text);
            }
            out.code
        }
        Err(e) => {
            if cli.json {
                let doc = json!({
                    "command": command,
                    "format_version": FORMAT_VERSION,
                    "ok": false,
                    "error": e.body(),
                });
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("json"));
            } else {
                eprintln!("ecstore {command}: {e}");
                if let CliError::UploadFailed { failures, .. } | CliError::DownloadFailed { failures, .. } = &e {
                    for f in failures {
                        eprintln!("  chunk {} on {}: {}", f.chunk_index, f.endpoint_id, f.error);
                    }
                }
            }
            e.exit_code()
        }
    };
    ExitCode::from(exit as u8)
}
