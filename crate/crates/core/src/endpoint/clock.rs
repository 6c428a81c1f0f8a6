use std::sync::{Arc, Mutex};

/// Shared virtual clock for one simulation run.
///
/// Each worker slot owns a [`Lane`], a private time cursor. Simulated
/// operations advance the lane they run on, and the clock tracks the latest
/// point any lane has reached, so operations on different lanes overlap
/// (max) while operations on one lane add up (sum).
#[derive(Debug)]
pub struct SimClock {
    now: Mutex<f64>,
    byte_scale: u64,
}

impl SimClock {
    pub fn new() -> Arc<Self> {
        Self::with_byte_scale(1)
    }

    /// Clock where every real byte moved is charged as `byte_scale` bytes.
    /// Lets benchmarks model gigabyte files with megabyte buffers.
    pub fn with_byte_scale(byte_scale: u64) -> Arc<Self> {
        assert!(byte_scale >= 1, "byte scale must be at least 1");
        Arc::new(SimClock {
            now: Mutex::new(0.0),
            byte_scale,
        })
    }

    pub fn now(&self) -> f64 {
        *self.now.lock().expect("clock lock poisoned")
    }

    pub fn byte_scale(&self) -> u64 {
        self.byte_scale
    }

    /// Nominal size of `real` bytes.
    pub fn scaled(&self, real: u64) -> u64 {
        real.saturating_mul(self.byte_scale)
    }

    /// Move the clock forward to `t` if it is behind.
    pub fn advance_to(&self, t: f64) {
        let mut now = self.now.lock().expect("clock lock poisoned");
        if t > *now {
            *now = t;
        }
    }

    /// Serial charge: a fresh lane at `now`, advanced by `seconds`.
    pub fn advance(self: &Arc<Self>, seconds: f64) {
        self.lane().charge(seconds);
    }

    /// A lane starting at the current time.
    pub fn lane(self: &Arc<Self>) -> Lane {
        Lane {
            at: self.now(),
            clock: Arc::clone(self),
        }
    }

    pub fn lane_at(self: &Arc<Self>, at: f64) -> Lane {
        Lane {
            at,
            clock: Arc::clone(self),
        }
    }
}

/// Time cursor of one worker slot.
#[derive(Debug, Clone)]
pub struct Lane {
    at: f64,
    clock: Arc<SimClock>,
}

impl Lane {
    pub fn at(&self) -> f64 {
        self.at
    }

    pub fn clock(&self) -> &Arc<SimClock> {
        &self.clock
    }

    pub fn charge(&mut self, seconds: f64) {
        debug_assert!(seconds >= 0.0);
        self.at += seconds;
        self.clock.advance_to(self.at);
    }

    /// Idle until `t` (no-op if the lane is already past it).
    pub fn wait_until(&mut self, t: f64) {
        if t > self.at {
            self.at = t;
            self.clock.advance_to(t);
        }
    }
}
