//! Deterministic discrete-event kernel.
//!
//! The kernel owns the simulation clock, a time-ordered event queue and the
//! seeded random substreams. Events are ordered by `(fire_at, seq)` where
//! `seq` is the insertion counter, so same-instant events fire in the order
//! they were scheduled.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::ops::{Add, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Simulation time in integer microseconds since start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_secs(s: u64) -> Self {
        SimTime(s * 1_000_000)
    }

    pub fn micros(self) -> u64 {
        self.0
    }
}

impl Add<u64> for SimTime {
    type Output = SimTime;

    fn add(self, rhs: u64) -> SimTime {
        SimTime(self.0 + rhs)
    }
}

impl Sub for SimTime {
    type Output = u64;

    fn sub(self, rhs: SimTime) -> u64 {
        self.0 - rhs.0
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}us", self.0)
    }
}

/// Handle returned by [`Kernel::schedule`]; the insertion sequence number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventHandle(pub u64);

struct Scheduled<E> {
    fire_at: SimTime,
    seq: u64,
    action: E,
}

impl<E> PartialEq for Scheduled<E> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq == other.seq
    }
}

impl<E> Eq for Scheduled<E> {}

impl<E> PartialOrd for Scheduled<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Scheduled<E> {
    // BinaryHeap is a max-heap; invert so the smallest (fire_at, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.fire_at, other.seq).cmp(&(self.fire_at, self.seq))
    }
}

/// Named random substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Topology,
    Backoff,
    Traffic,
}

impl Stream {
    fn index(self) -> usize {
        match self {
            Stream::Topology => 0,
            Stream::Backoff => 1,
            Stream::Traffic => 2,
        }
    }
}

/// Three independent ChaCha8 generators derived from one seed. Each
/// substream uses its own ChaCha stream id, so draws on one never shift
/// another.
#[derive(Debug, Clone)]
pub struct RandomStreams {
    seed: u64,
    streams: [ChaCha8Rng; 3],
}

impl RandomStreams {
    pub fn new(seed: u64) -> Self {
        let make = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        RandomStreams {
            seed,
            streams: [make(0), make(1), make(2)],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform integer in `[lo, hi]`.
    ///
    /// Panics if `lo > hi`.
    pub fn draw_uniform_int(&mut self, stream: Stream, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi, "draw_uniform_int: empty range [{lo}, {hi}]");
        self.streams[stream.index()].random_range(lo..=hi)
    }
}

/// The event kernel, generic over the event payload type.
pub struct Kernel<E> {
    now: SimTime,
    next_seq: u64,
    queue: BinaryHeap<Scheduled<E>>,
    rng: RandomStreams,
    processed: u64,
}

impl<E> Kernel<E> {
    pub fn new(seed: u64) -> Self {
        Kernel {
            now: SimTime::ZERO,
            next_seq: 0,
            queue: BinaryHeap::new(),
            rng: RandomStreams::new(seed),
            processed: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Number of events dispatched so far.
    pub fn processed(&self) -> u64 {
        self.processed
    }

    /// Enqueue `action` to fire at `at`.
    ///
    /// Panics if `at` lies in the past: that is a logic error in the caller
    /// and the run cannot be trusted afterwards.
    pub fn schedule(&mut self, at: SimTime, action: E) -> EventHandle {
        assert!(
            at >= self.now,
            "event scheduled in the past: at {at}, clock {}",
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Scheduled {
            fire_at: at,
            seq,
            action,
        });
        EventHandle(seq)
    }

    pub fn schedule_in(&mut self, delay_us: u64, action: E) -> EventHandle {
        let at = self.now + delay_us;
        self.schedule(at, action)
    }

    pub fn draw_uniform_int(&mut self, stream: Stream, lo: i64, hi: i64) -> i64 {
        self.rng.draw_uniform_int(stream, lo, hi)
    }

    pub fn rng(&mut self) -> &mut RandomStreams {
        &mut self.rng
    }

    /// Process every event with `fire_at <= t_end` in `(fire_at, seq)`
    /// order, then leave the clock at `t_end`.
    pub fn run_until<H>(&mut self, t_end: SimTime, mut handler: H) -> SimTime
    where
        H: FnMut(&mut Kernel<E>, E),
    {
        assert!(
            t_end >= self.now,
            "run_until target {t_end} precedes clock {}",
            self.now
        );
        while self.queue.peek().is_some_and(|ev| ev.fire_at <= t_end) {
            let ev = self.queue.pop().expect("peeked");
            debug_assert!(ev.fire_at >= self.now);
            self.now = ev.fire_at;
            self.processed += 1;
            handler(self, ev.action);
        }
        self.now = t_end;
        self.now
    }
}
