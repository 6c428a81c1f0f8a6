//! Work pool: a fixed set of workers consuming transfer jobs from one queue.
//!
//! Two executors share the same scheduling rules. [`VirtualExecutor`] runs
//! the pool as a discrete-event simulation on the endpoints' [`SimClock`]:
//! each worker is a [`Lane`], jobs finish at virtual times, and outcomes are
//! delivered in completion order, so runs are fully reproducible.
//! [`ThreadExecutor`] runs real OS threads and measures wall time.

use std::collections::VecDeque;
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Direction, TransferPolicy};
use crate::endpoint::{EndpointError, Lane, SimClock};
use crate::placement::PlacementError;

/// One chunk transfer, possibly a retry of an earlier attempt.
#[derive(Debug, Clone)]
pub struct TransferJob {
    pub direction: Direction,
    pub chunk_index: usize,
    pub endpoint_id: String,
    pub object_name: String,
    /// Attempts already made before this one.
    pub attempts_made: usize,
    /// Endpoint of the first attempt; retries rotate from here.
    pub origin_endpoint: String,
    /// Serialized chunk for puts.
    pub payload: Option<Arc<Vec<u8>>>,
    /// Start of the first attempt, set by the pool.
    pub(crate) first_start: Option<f64>,
}

impl TransferJob {
    pub fn put(chunk_index: usize, endpoint_id: &str, object_name: &str, payload: Arc<Vec<u8>>) -> Self {
        TransferJob {
            direction: Direction::Put,
            chunk_index,
            endpoint_id: endpoint_id.to_string(),
            object_name: object_name.to_string(),
            attempts_made: 0,
            origin_endpoint: endpoint_id.to_string(),
            payload: Some(payload),
            first_start: None,
        }
    }

    pub fn get(chunk_index: usize, endpoint_id: &str, object_name: &str) -> Self {
        TransferJob {
            direction: Direction::Get,
            chunk_index,
            endpoint_id: endpoint_id.to_string(),
            object_name: object_name.to_string(),
            attempts_made: 0,
            origin_endpoint: endpoint_id.to_string(),
            payload: None,
            first_start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JobError {
    #[error(transparent)]
    Endpoint(#[from] EndpointError),
    #[error("chunk {chunk} is corrupt: {reason}")]
    Corrupt { chunk: usize, reason: String },
    #[error("no retry target: {0}")]
    NoRetryTarget(String),
}

impl From<PlacementError> for JobError {
    fn from(e: PlacementError) -> Self {
        JobError::NoRetryTarget(e.to_string())
    }
}

/// Final result of one job after any retries.
#[derive(Debug, Clone)]
pub struct JobOutcome {
    /// The job as last attempted (endpoint reflects retries).
    pub job: TransferJob,
    pub result: Result<Option<Vec<u8>>, JobError>,
    /// Total attempts, including the last.
    pub attempts: usize,
    pub started: f64,
    pub finished: f64,
    /// Completion order among final outcomes.
    pub sequence: usize,
    /// Arrived after the control asked to stop dispatching.
    pub after_stop: bool,
}

impl JobOutcome {
    pub fn elapsed(&self) -> f64 {
        self.finished - self.started
    }

    pub fn succeeded(&self) -> bool {
        self.result.is_ok()
    }
}

/// What the pool asks of its caller. Calls are serialized.
pub trait PoolControl: Send {
    /// A job reached its final outcome; return follow-up jobs to enqueue.
    fn on_outcome(&mut self, outcome: &JobOutcome) -> Vec<TransferJob>;
    /// Once true, no further jobs are dispatched. In-flight jobs still finish.
    fn should_stop(&self) -> bool;
    /// Endpoint for the next attempt of a failed job.
    fn retry_endpoint(&self, job: &TransferJob) -> Result<String, JobError>;
}

/// Runs the transfer itself on a worker lane.
pub type WorkFn<'a> = dyn Fn(&TransferJob, &mut Lane) -> Result<Option<Vec<u8>>, JobError> + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeBase {
    Virtual,
    Wall,
}

#[derive(Debug, Clone)]
pub struct PoolOutcome {
    /// Final outcomes in completion order.
    pub outcomes: Vec<JobOutcome>,
    /// Attempts dispatched, retries included.
    pub dispatched: usize,
    /// Jobs left in the queue when the pool stopped.
    pub undispatched: Vec<TransferJob>,
    pub started: f64,
    pub finished: f64,
}

impl PoolOutcome {
    pub fn makespan(&self) -> f64 {
        self.finished - self.started
    }
}

pub trait Executor: Sync {
    fn time_base(&self) -> TimeBase;

    fn execute(
        &self,
        jobs: Vec<TransferJob>,
        policy: &TransferPolicy,
        clock: &Arc<SimClock>,
        work: &WorkFn<'_>,
        control: &mut dyn PoolControl,
    ) -> PoolOutcome;

    /// Account for local encode/decode work that produced or rebuilt
    /// `real_bytes` of chunk data, taking `wall_seconds` of real time.
    /// Returns the seconds attributed in this executor's time base.
    fn charge_codec(&self, clock: &Arc<SimClock>, real_bytes: u64, wall_seconds: f64) -> f64;
}

/// Run `jobs` through a pool of `policy.worker_count` workers.
pub fn run_pool(
    jobs: Vec<TransferJob>,
    policy: &TransferPolicy,
    executor: &dyn Executor,
    clock: &Arc<SimClock>,
    work: &WorkFn<'_>,
    control: &mut dyn PoolControl,
) -> PoolOutcome {
    executor.execute(jobs, policy, clock, work, control)
}

/// Applies retry policy to a finished attempt. Returns the final outcome,
/// or `None` when the job was re-enqueued.
fn settle(
    mut job: TransferJob,
    result: Result<Option<Vec<u8>>, JobError>,
    start: f64,
    policy: &TransferPolicy,
    control: &dyn PoolControl,
    queue: &mut VecDeque<TransferJob>,
) -> Option<(TransferJob, Result<Option<Vec<u8>>, JobError>, f64)> {
    let first_start = *job.first_start.get_or_insert(start);
    job.attempts_made += 1;
    if result.is_err() && job.attempts_made <= policy.max_retries {
        match control.retry_endpoint(&job) {
            Ok(next) => {
                job.endpoint_id = next;
                queue.push_back(job);
                return None;
            }
            Err(e) => return Some((job, Err(e), first_start)),
        }
    }
    Some((job, result, first_start))
}

/// Discrete-event executor on the shared virtual clock.
#[derive(Debug, Clone, Copy)]
pub struct VirtualExecutor {
    /// Virtual encode/decode throughput in bytes of chunk data per second.
    pub codec_bandwidth: f64,
}

impl VirtualExecutor {
    pub fn new(codec_bandwidth: f64) -> Self {
        assert!(codec_bandwidth > 0.0, "codec bandwidth must be positive");
        VirtualExecutor { codec_bandwidth }
    }

    /// Encoding and decoding cost no virtual time.
    pub fn free_codec() -> Self {
        VirtualExecutor {
            codec_bandwidth: f64::INFINITY,
        }
    }
}

struct Pending {
    finish: f64,
    seq: usize,
    start: f64,
    job: TransferJob,
    result: Result<Option<Vec<u8>>, JobError>,
}

impl Executor for VirtualExecutor {
    fn time_base(&self) -> TimeBase {
        TimeBase::Virtual
    }

    fn execute(
        &self,
        jobs: Vec<TransferJob>,
        policy: &TransferPolicy,
        clock: &Arc<SimClock>,
        work: &WorkFn<'_>,
        control: &mut dyn PoolControl,
    ) -> PoolOutcome {
        let start = clock.now();
        let mut lanes: Vec<Lane> = (0..policy.worker_count).map(|_| clock.lane_at(start)).collect();
        let mut queue: VecDeque<TransferJob> = jobs.into();
        let mut pending: Vec<Pending> = Vec::new();
        let mut outcomes = Vec::new();
        let mut now = start;
        let mut dispatched = 0;
        let mut seq = 0;

        loop {
            // Fill every idle worker, lowest index first.
            for lane in lanes.iter_mut() {
                if control.should_stop() || queue.is_empty() {
                    break;
                }
                if lane.at() > now {
                    continue;
                }
                let job = queue.pop_front().expect("queue checked non-empty");
                lane.wait_until(now);
                let began = lane.at();
                let result = work(&job, lane);
                dispatched += 1;
                pending.push(Pending {
                    finish: lane.at(),
                    seq,
                    start: began,
                    job,
                    result,
                });
                seq += 1;
            }
            if pending.is_empty() {
                break;
            }
            // Advance to the next completion and deliver everything finishing then.
            now = pending.iter().map(|p| p.finish).fold(f64::INFINITY, f64::min);
            let mut due: Vec<Pending> = Vec::new();
            let mut i = 0;
            while i < pending.len() {
                if pending[i].finish <= now {
                    due.push(pending.swap_remove(i));
                } else {
                    i += 1;
                }
            }
            due.sort_by_key(|p| p.seq);
            for p in due {
                let Some((job, result, first_start)) =
                    settle(p.job, p.result, p.start, policy, &*control, &mut queue)
                else {
                    continue;
                };
                let after_stop = control.should_stop();
                let outcome = JobOutcome {
                    attempts: job.attempts_made,
                    job,
                    result,
                    started: first_start,
                    finished: p.finish,
                    sequence: outcomes.len(),
                    after_stop,
                };
                if !after_stop {
                    for follow in control.on_outcome(&outcome) {
                        queue.push_back(follow);
                    }
                }
                outcomes.push(outcome);
            }
        }
        let finished = lanes.iter().map(Lane::at).fold(start, f64::max);
        PoolOutcome {
            outcomes,
            dispatched,
            undispatched: queue.into(),
            started: start,
            finished,
        }
    }

    fn charge_codec(&self, clock: &Arc<SimClock>, real_bytes: u64, _wall_seconds: f64) -> f64 {
        let seconds = clock.scaled(real_bytes) as f64 / self.codec_bandwidth;
        if seconds > 0.0 {
            clock.advance(seconds);
        }
        seconds
    }
}

/// Real threads; times are wall-clock seconds since the pool started.
#[derive(Debug, Clone, Copy, Default)]
pub struct ThreadExecutor;

struct Shared<'c> {
    queue: VecDeque<TransferJob>,
    in_flight: usize,
    dispatched: usize,
    outcomes: Vec<JobOutcome>,
    control: &'c mut dyn PoolControl,
}

impl Executor for ThreadExecutor {
    fn time_base(&self) -> TimeBase {
        TimeBase::Wall
    }

    fn execute(
        &self,
        jobs: Vec<TransferJob>,
        policy: &TransferPolicy,
        clock: &Arc<SimClock>,
        work: &WorkFn<'_>,
        control: &mut dyn PoolControl,
    ) -> PoolOutcome {
        let epoch = Instant::now();
        let shared = Mutex::new(Shared {
            queue: jobs.into(),
            in_flight: 0,
            dispatched: 0,
            outcomes: Vec::new(),
            control,
        });
        let wake = Condvar::new();

        thread::scope(|scope| {
            for _ in 0..policy.worker_count {
                scope.spawn(|| {
                    let mut lane = clock.lane();
                    loop {
                        let job = {
                            let mut st = shared.lock().expect("pool lock poisoned");
                            loop {
                                if st.control.should_stop() {
                                    break None;
                                }
                                if let Some(job) = st.queue.pop_front() {
                                    st.in_flight += 1;
                                    st.dispatched += 1;
                                    break Some(job);
                                }
                                if st.in_flight == 0 {
                                    break None;
                                }
                                st = wake.wait(st).expect("pool lock poisoned");
                            }
                        };
                        let Some(job) = job else {
                            wake.notify_all();
                            return;
                        };
                        let began = epoch.elapsed().as_secs_f64();
                        let result = work(&job, &mut lane);
                        let finish = epoch.elapsed().as_secs_f64();

                        let mut st = shared.lock().expect("pool lock poisoned");
                        st.in_flight -= 1;
                        let Shared {
                            queue,
                            outcomes,
                            control,
                            ..
                        } = &mut *st;
                        if let Some((job, result, first_start)) =
                            settle(job, result, began, policy, &**control, queue)
                        {
                            let after_stop = control.should_stop();
                            let outcome = JobOutcome {
                                attempts: job.attempts_made,
                                job,
                                result,
                                started: first_start,
                                finished: finish,
                                sequence: outcomes.len(),
                                after_stop,
                            };
                            if !after_stop {
                                let follow = control.on_outcome(&outcome);
                                queue.extend(follow);
                            }
                            outcomes.push(outcome);
                        }
                        drop(st);
                        wake.notify_all();
                    }
                });
            }
        });

        let st = shared.into_inner().expect("pool lock poisoned");
        PoolOutcome {
            outcomes: st.outcomes,
            dispatched: st.dispatched,
            undispatched: st.queue.into(),
            started: 0.0,
            finished: epoch.elapsed().as_secs_f64(),
        }
    }

    fn charge_codec(&self, _clock: &Arc<SimClock>, _real_bytes: u64, wall_seconds: f64) -> f64 {
        wall_seconds
    }
}
