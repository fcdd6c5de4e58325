//! Process-wide accounting of live tensor elements.
//!
//! Every [`Tensor`](super::Tensor) registers its element count on creation
//! and releases it on drop. The high-water mark is what the benchmark
//! reports as memory; an optional limit lets fallible allocations fail
//! with [`Error::OutOfMemory`] before the allocator is asked for the
//! storage.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);
static LIMIT: AtomicUsize = AtomicUsize::new(usize::MAX);

pub(crate) fn register(n: usize) {
    let live = LIVE.fetch_add(n, Ordering::Relaxed) + n;
    PEAK.fetch_max(live, Ordering::Relaxed);
}

pub(crate) fn release(n: usize) {
    LIVE.fetch_sub(n, Ordering::Relaxed);
}

/// Fails if allocating `n` more elements would exceed the configured limit.
pub(crate) fn reserve(n: usize) -> Result<()> {
    let limit = LIMIT.load(Ordering::Relaxed);
    let live = LIVE.load(Ordering::Relaxed);
    if live.saturating_add(n) > limit {
        return Err(Error::OutOfMemory {
            requested: n,
            live,
            limit,
        });
    }
    Ok(())
}

/// Elements currently held by live tensors.
pub fn live_elements() -> usize {
    LIVE.load(Ordering::Relaxed)
}

/// Highest value of [`live_elements`] since the last [`reset_peak`].
pub fn peak_elements() -> usize {
    PEAK.load(Ordering::Relaxed)
}

/// Restarts the high-water mark from the current live count.
pub fn reset_peak() {
    PEAK.store(LIVE.load(Ordering::Relaxed), Ordering::Relaxed);
}

/// Caps the live-element count seen by fallible allocations. `None` removes the cap.
pub fn set_limit(limit: Option<usize>) {
    LIMIT.store(limit.unwrap_or(usize::MAX), Ordering::Relaxed);
}

pub fn limit() -> Option<usize> {
    match LIMIT.load(Ordering::Relaxed) {
        usize::MAX => None,
        n => Some(n),
    }
}
