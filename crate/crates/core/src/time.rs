//! Protocol time: microseconds since 2004-01-01T00:00:00Z, plus an injectable
//! clock so expiry logic is testable without sleeping.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

/// Seconds between the Unix epoch and 2004-01-01T00:00:00Z.
const EPOCH_2004_UNIX_SECS: u64 = 1_072_915_200;

const MICROS_PER_SEC: u64 = 1_000_000;

/// Absolute time in microseconds since 2004-01-01T00:00:00Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Time64(pub u64);

impl Time64 {
    pub const fn from_micros(micros: u64) -> Self {
        Time64(micros)
    }

    pub const fn from_secs(secs: u64) -> Self {
        Time64(secs * MICROS_PER_SEC)
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn from_system_time(t: SystemTime) -> Self {
        let since_unix = t.duration_since(UNIX_EPOCH).unwrap_or_default();
        let micros = since_unix
            .as_micros()
            .saturating_sub(u128::from(EPOCH_2004_UNIX_SECS) * u128::from(MICROS_PER_SEC));
        Time64(u64::try_from(micros).unwrap_or(u64::MAX))
    }

    /// `self + d`, saturating at the end of representable time.
    pub fn saturating_add(self, d: Duration) -> Time64 {
        Time64(self.0.saturating_add(d.as_micros()))
    }

    pub fn saturating_add_micros(self, micros: u64) -> Time64 {
        Time64(self.0.saturating_add(micros))
    }
}

/// A span of whole seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Duration(pub u32);

impl Duration {
    pub const HOUR: Duration = Duration(3600);
    pub const WEEK: Duration = Duration(7 * 24 * 3600);
    pub const YEAR: Duration = Duration(365 * 24 * 3600);

    pub const fn from_secs(secs: u32) -> Self {
        Duration(secs)
    }

    pub const fn years(n: u32) -> Self {
        Duration(n * Self::YEAR.0)
    }

    pub const fn as_secs(self) -> u32 {
        self.0
    }

    pub const fn as_micros(self) -> u64 {
        self.0 as u64 * MICROS_PER_SEC
    }
}

/// A half-open validity window `[start, start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Validity {
    pub start: Time64,
    pub duration: Duration,
}

impl Validity {
    pub const fn new(start: Time64, duration: Duration) -> Self {
        Validity { start, duration }
    }

    pub fn end(&self) -> Time64 {
        self.start.saturating_add(self.duration)
    }

    pub fn contains(&self, t: Time64) -> bool {
        self.start <= t && t < self.end()
    }

    /// True when this window lies entirely inside `outer`.
    pub fn nests_within(&self, outer: &Validity) -> bool {
        self.start >= outer.start && self.end() <= outer.end()
    }
}

/// Time source injected into every component that compares against "now".
pub trait Clock: Send + Sync {
    fn now(&self) -> Time64;
}

/// Wall-clock time.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Time64 {
        Time64::from_system_time(SystemTime::now())
    }
}

/// A settable clock for tests and reproducible runs.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(t: Time64) -> Self {
        ManualClock(AtomicU64::new(t.0))
    }

    pub fn set(&self, t: Time64) {
        self.0.store(t.0, Ordering::SeqCst);
    }

    pub fn advance(&self, d: Duration) {
        self.0.fetch_add(d.as_micros(), Ordering::SeqCst);
    }

    pub fn advance_micros(&self, micros: u64) {
        self.0.fetch_add(micros, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Time64 {
        Time64(self.0.load(Ordering::SeqCst))
    }
}

impl<C: Clock + ?Sized> Clock for std::sync::Arc<C> {
    fn now(&self) -> Time64 {
        (**self).now()
    }
}
