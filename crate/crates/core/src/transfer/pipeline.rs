use std::collections::VecDeque;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use super::pool::{Executor, JobError, JobOutcome, PoolControl, PoolOutcome, TransferJob};
use super::verify::{self, VerifyReport};
use super::{ChunkFailure, ChunkReport, Direction, TransferError, TransferPolicy, TransferReport};
use crate::catalogue::{self, Catalogue, CatalogueError, ChunkLocation, FileManifest};
use crate::codec::{self, Chunk, CodingParams, DecodePath};
use crate::endpoint::{Endpoints, Lane};
use crate::placement::{self, EndpointVector};

/// Flat object name for one chunk of `logical_path`: the path without its
/// leading slash, with `%`, `/` and a leading `.` percent-escaped, followed
/// by the zfec share suffix. `/data/f.bin` chunk 3 of 15 becomes
/// `data%2Ff.bin.03_15.fec`.
pub fn remote_object_name(logical_path: &str, chunk_index: usize, m: usize) -> Result<String, TransferError> {
    let trimmed = logical_path.trim_start_matches('/');
    let mut escaped = String::with_capacity(trimmed.len() + 8);
    for (i, ch) in trimmed.chars().enumerate() {
        match ch {
            '%' => escaped.push_str("%25"),
            '/' => escaped.push_str("%2F"),
            '.' if i == 0 => escaped.push_str("%2E"),
            c => escaped.push(c),
        }
    }
    Ok(codec::format_share_name(&escaped, chunk_index, m)?)
}

/// Wall-clock timer that is only read under a wall-clock executor, so
/// virtual runs never touch the system clock (unavailable on some targets).
struct Stopwatch(Option<Instant>);

impl Stopwatch {
    fn start(wall: bool) -> Self {
        Stopwatch(wall.then(Instant::now))
    }

    fn secs(&self) -> f64 {
        self.0.map_or(0.0, |t| t.elapsed().as_secs_f64())
    }
}

/// Files removed by [`Pipeline::remove_file`].
#[derive(Debug, Clone)]
pub struct RemoveReport {
    pub manifest: FileManifest,
    pub deleted: usize,
    /// Chunks that could not be deleted (already gone, endpoint error).
    pub failures: Vec<ChunkFailure>,
}

/// Endpoints, policy and executor for a series of transfers.
#[derive(Clone, Copy)]
pub struct Pipeline<'a> {
    pub endpoints: &'a Endpoints,
    pub policy: TransferPolicy,
    pub executor: &'a dyn Executor,
}

struct PutControl<'a> {
    vector: &'a EndpointVector,
    failed: bool,
}

impl PoolControl for PutControl<'_> {
    fn on_outcome(&mut self, outcome: &JobOutcome) -> Vec<TransferJob> {
        if !outcome.succeeded() {
            self.failed = true;
        }
        Vec::new()
    }

    fn should_stop(&self) -> bool {
        self.failed
    }

    fn retry_endpoint(&self, job: &TransferJob) -> Result<String, JobError> {
        Ok(placement::retry_target(&job.origin_endpoint, self.vector, job.attempts_made)?)
    }
}

struct GetControl {
    needed: usize,
    successes: usize,
    early_stop: bool,
    fallback: VecDeque<TransferJob>,
}

impl PoolControl for GetControl {
    fn on_outcome(&mut self, outcome: &JobOutcome) -> Vec<TransferJob> {
        if outcome.succeeded() {
            self.successes += 1;
            Vec::new()
        } else {
            self.fallback.pop_front().into_iter().collect()
        }
    }

    fn should_stop(&self) -> bool {
        self.early_stop && self.successes >= self.needed
    }

    fn retry_endpoint(&self, job: &TransferJob) -> Result<String, JobError> {
        // A chunk only exists where it was placed.
        Ok(job.endpoint_id.clone())
    }
}

fn chunk_reports(pool: &PoolOutcome) -> Vec<ChunkReport> {
    pool.outcomes
        .iter()
        .map(|o| ChunkReport {
            chunk_index: o.job.chunk_index,
            endpoint_id: o.job.endpoint_id.clone(),
            object_name: o.job.object_name.clone(),
            success: o.succeeded(),
            attempts: o.attempts,
            started_s: o.started - pool.started,
            elapsed_s: o.elapsed(),
            discarded: o.after_stop && o.job.direction == Direction::Get,
            error: o.result.as_ref().err().map(ToString::to_string),
        })
        .collect()
}

fn failures(pool: &PoolOutcome) -> Vec<ChunkFailure> {
    pool.outcomes
        .iter()
        .filter_map(|o| {
            o.result.as_ref().err().map(|e| ChunkFailure {
                chunk_index: o.job.chunk_index,
                endpoint_id: o.job.endpoint_id.clone(),
                error: e.to_string(),
            })
        })
        .collect()
}

impl<'a> Pipeline<'a> {
    pub fn new(endpoints: &'a Endpoints, policy: TransferPolicy, executor: &'a dyn Executor) -> Self {
        Pipeline {
            endpoints,
            policy,
            executor,
        }
    }

    fn is_wall(&self) -> bool {
        self.executor.time_base() == super::TimeBase::Wall
    }

    fn now(&self, epoch: &Stopwatch) -> f64 {
        if self.is_wall() {
            epoch.secs()
        } else {
            self.endpoints.clock().now()
        }
    }

    fn work(&self) -> impl Fn(&TransferJob, &mut Lane) -> Result<Option<Vec<u8>>, JobError> + Sync + '_ {
        move |job: &TransferJob, lane: &mut Lane| {
            let ep = self.endpoints.get(&job.endpoint_id)?;
            match job.direction {
                Direction::Put => {
                    let payload = job.payload.as_ref().expect("put jobs carry a payload");
                    ep.store(lane, &job.object_name, payload)?;
                    Ok(None)
                }
                Direction::Get => Ok(Some(ep.fetch(lane, &job.object_name)?)),
            }
        }
    }

    /// Encode `data`, upload its chunks and register it under `logical_path`.
    ///
    /// If any chunk cannot be stored after retries, chunks already stored are
    /// deleted and nothing is registered.
    pub fn put_file(
        &self,
        catalogue: &mut Catalogue,
        data: &[u8],
        logical_path: &str,
        params: CodingParams,
    ) -> Result<TransferReport, TransferError> {
        self.policy.validate()?;
        catalogue::validate_logical_path(logical_path)?;
        match catalogue.lookup(logical_path) {
            Err(CatalogueError::NotFound(_)) => {}
            Ok(_) | Err(CatalogueError::Corruption { .. }) => {
                return Err(CatalogueError::AlreadyExists(logical_path.to_string()).into())
            }
            Err(e) => return Err(e.into()),
        }
        let clock = self.endpoints.clock();
        let epoch = Stopwatch::start(self.is_wall());
        let t0 = self.now(&epoch);

        let encode_start = Stopwatch::start(self.is_wall());
        let chunks = codec::encode(data, params)?;
        let coding_bytes = (params.coding_chunks() * params.chunk_len(data.len())) as u64;
        let codec_s = self
            .executor
            .charge_codec(clock, coding_bytes, encode_start.secs());

        let plan = placement::round_robin(params.m(), self.endpoints.vector())?;
        let mut jobs = Vec::with_capacity(params.m());
        for chunk in &chunks {
            let i = chunk.index();
            let object = remote_object_name(logical_path, i, params.m())?;
            let endpoint = plan.endpoint_of(i).expect("plan covers every chunk");
            jobs.push(TransferJob::put(i, endpoint, &object, Arc::new(chunk.to_bytes())));
        }
        drop(chunks);

        let mut control = PutControl {
            vector: self.endpoints.vector(),
            failed: false,
        };
        let work = self.work();
        let pool = self.executor.execute(jobs, &self.policy, clock, &work, &mut control);
        let total_s = self.now(&epoch) - t0;

        let stored: Vec<&JobOutcome> = pool.outcomes.iter().filter(|o| o.succeeded()).collect();
        let report = TransferReport {
            logical_path: logical_path.to_string(),
            direction: Direction::Put,
            params,
            size_bytes: data.len() as u64,
            time_base: self.executor.time_base(),
            threads_used: self.policy.worker_count,
            total_s,
            codec_s,
            transfer_s: pool.makespan(),
            dispatched: pool.dispatched,
            chunks_fetched: stored.len(),
            recovered_chunks: None,
            chunks: chunk_reports(&pool),
        };

        if stored.len() < params.m() {
            self.delete_objects(stored.iter().map(|o| (&o.job.endpoint_id, &o.job.object_name)));
            let mut chunks: Vec<usize> = failures(&pool).iter().map(|f| f.chunk_index).collect();
            // Chunks never dispatched because the upload was abandoned.
            chunks.extend(pool.undispatched.iter().map(|j| j.chunk_index));
            chunks.sort_unstable();
            return Err(TransferError::UploadFailed {
                path: logical_path.to_string(),
                chunks,
                failures: failures(&pool),
                report: Box::new(report),
            });
        }

        let mut chunk_locations: Vec<ChunkLocation> = stored
            .iter()
            .map(|o| ChunkLocation {
                chunk_index: o.job.chunk_index,
                endpoint_id: o.job.endpoint_id.clone(),
                remote_name: o.job.object_name.clone(),
            })
            .collect();
        chunk_locations.sort();
        let manifest = FileManifest {
            logical_path: logical_path.to_string(),
            params,
            original_size: data.len() as u64,
            pad_length: params.pad_length(data.len()) as u32,
            chunk_locations,
        };
        if let Err(e) = catalogue.register_file(&manifest) {
            self.delete_objects(stored.iter().map(|o| (&o.job.endpoint_id, &o.job.object_name)));
            return Err(e.into());
        }
        Ok(report)
    }

    pub fn put_path(
        &self,
        catalogue: &mut Catalogue,
        local: &Path,
        logical_path: &str,
        params: CodingParams,
    ) -> Result<TransferReport, TransferError> {
        let data = fs::read(local).map_err(|e| TransferError::Io {
            path: local.to_path_buf(),
            message: e.to_string(),
        })?;
        self.put_file(catalogue, &data, logical_path, params)
    }

    /// Fetch and decode `logical_path`.
    pub fn get_file(&self, catalogue: &Catalogue, logical_path: &str) -> Result<(Vec<u8>, TransferReport), TransferError> {
        self.policy.validate()?;
        let manifest = catalogue.lookup(logical_path)?;
        let params = manifest.params;
        let k = params.k();
        let clock = self.endpoints.clock();
        let epoch = Stopwatch::start(self.is_wall());
        let t0 = self.now(&epoch);

        // Data chunks first: they decode without matrix inversion.
        let mut ordered: Vec<&ChunkLocation> = manifest.chunk_locations.iter().collect();
        ordered.sort_by_key(|l| (l.chunk_index >= k, l.chunk_index));
        let mut jobs: VecDeque<TransferJob> = ordered
            .iter()
            .map(|l| TransferJob::get(l.chunk_index, &l.endpoint_id, &l.remote_name))
            .collect();
        let fallback = if self.policy.fetch_all || !self.policy.early_stop {
            VecDeque::new()
        } else {
            jobs.split_off(k.min(jobs.len()))
        };
        let mut control = GetControl {
            needed: k,
            successes: 0,
            early_stop: self.policy.early_stop,
            fallback,
        };

        let fetch = self.work();
        let expected_len = manifest.chunk_len() as usize;
        let work = |job: &TransferJob, lane: &mut Lane| -> Result<Option<Vec<u8>>, JobError> {
            let bytes = fetch(job, lane)?.expect("fetch returns bytes");
            let chunk = Chunk::from_bytes(&bytes).map_err(|e| JobError::Corrupt {
                chunk: job.chunk_index,
                reason: e.to_string(),
            })?;
            verify::check_chunk(&chunk, &manifest, job.chunk_index, expected_len)
                .map_err(|reason| JobError::Corrupt {
                    chunk: job.chunk_index,
                    reason,
                })?;
            Ok(Some(bytes))
        };
        let pool = self.executor.execute(jobs.into(), &self.policy, clock, &work, &mut control);
        let transfer_s = pool.makespan();

        let mut report = TransferReport {
            logical_path: logical_path.to_string(),
            direction: Direction::Get,
            params,
            size_bytes: manifest.original_size,
            time_base: self.executor.time_base(),
            threads_used: self.policy.worker_count,
            total_s: 0.0,
            codec_s: 0.0,
            transfer_s,
            dispatched: pool.dispatched,
            chunks_fetched: pool.outcomes.iter().filter(|o| o.succeeded()).count(),
            recovered_chunks: None,
            chunks: chunk_reports(&pool),
        };

        // Surplus chunks that landed after the stop are discarded.
        let usable: Vec<Chunk> = pool
            .outcomes
            .iter()
            .filter(|o| !o.after_stop || !self.policy.early_stop)
            .filter_map(|o| o.result.as_ref().ok().cloned().flatten())
            .map(|bytes| Chunk::from_bytes(&bytes).expect("validated in worker"))
            .collect();
        if usable.len() < k {
            report.total_s = self.now(&epoch) - t0;
            return Err(TransferError::DownloadFailed {
                path: logical_path.to_string(),
                needed: k,
                available: usable.len(),
                failures: failures(&pool),
                report: Box::new(report),
            });
        }

        let decode_start = Stopwatch::start(self.is_wall());
        let rec = codec::reconstruct(&usable)?;
        let recovered = match rec.path {
            DecodePath::Systematic => 0,
            DecodePath::Inverted { recovered } => recovered,
        };
        report.codec_s = self.executor.charge_codec(
            clock,
            (recovered * expected_len) as u64,
            decode_start.secs(),
        );
        report.recovered_chunks = Some(recovered);
        report.total_s = self.now(&epoch) - t0;
        if rec.data.len() as u64 != manifest.original_size {
            return Err(TransferError::Codec(codec::CodecError::Format(format!(
                "decoded {} bytes, manifest says {}",
                rec.data.len(),
                manifest.original_size
            ))));
        }
        Ok((rec.data, report))
    }

    /// Fetch `logical_path` and write it to `local` (via a temporary file).
    pub fn get_to_path(&self, catalogue: &Catalogue, logical_path: &str, local: &Path) -> Result<TransferReport, TransferError> {
        let (data, report) = self.get_file(catalogue, logical_path)?;
        let io_err = |e: std::io::Error| TransferError::Io {
            path: local.to_path_buf(),
            message: e.to_string(),
        };
        let tmp = local.with_extension("ecstore-partial");
        fs::write(&tmp, &data).map_err(io_err)?;
        fs::rename(&tmp, local).map_err(io_err)?;
        Ok(report)
    }

    /// Unregister `logical_path` and delete its chunks.
    pub fn remove_file(&self, catalogue: &mut Catalogue, logical_path: &str) -> Result<RemoveReport, TransferError> {
        let manifest = catalogue.unregister(logical_path)?;
        let mut failures = Vec::new();
        let mut deleted = 0;
        for loc in &manifest.chunk_locations {
            let result = self
                .endpoints
                .get(&loc.endpoint_id)
                .and_then(|ep| ep.delete(&loc.remote_name));
            match result {
                Ok(()) => deleted += 1,
                Err(e) => failures.push(ChunkFailure {
                    chunk_index: loc.chunk_index,
                    endpoint_id: loc.endpoint_id.clone(),
                    error: e.to_string(),
                }),
            }
        }
        Ok(RemoveReport {
            manifest,
            deleted,
            failures,
        })
    }

    pub fn verify_file(&self, catalogue: &Catalogue, logical_path: &str) -> Result<VerifyReport, TransferError> {
        let manifest = catalogue.lookup(logical_path)?;
        Ok(verify::verify_manifest(&manifest, self.endpoints))
    }

    fn delete_objects<'s>(&self, objects: impl Iterator<Item = (&'s String, &'s String)>) {
        for (endpoint, object) in objects {
            if let Ok(ep) = self.endpoints.get(endpoint) {
                let _ = ep.delete(object);
            }
        }
    }
}
