//! Software instrumentation counters shared by all access methods.

use std::sync::atomic::{AtomicU64, Ordering};

/// Relaxed atomic counters. Workers accumulate privately and publish once per
/// task, so contention is one add per partition per query.
#[derive(Debug, Default)]
pub struct Counters {
    objects_compared: AtomicU64,
    early_breaks: AtomicU64,
    nodes_visited: AtomicU64,
    leaves_visited: AtomicU64,
    columns_scanned: AtomicU64,
}

/// A point-in-time copy of [`Counters`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CounterSnapshot {
    /// Full-object kernel evaluations.
    pub objects_compared: u64,
    /// Kernel evaluations that rejected the object.
    pub early_breaks: u64,
    /// Tree nodes (or VA-file buckets) touched.
    pub nodes_visited: u64,
    /// R*-tree leaves touched.
    pub leaves_visited: u64,
    /// One-dimensional column scans run by the vertical scan.
    pub columns_scanned: u64,
}

impl Counters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, local: &CounterSnapshot) {
        let add = |c: &AtomicU64, v: u64| {
            if v != 0 {
                c.fetch_add(v, Ordering::Relaxed);
            }
        };
        add(&self.objects_compared, local.objects_compared);
        add(&self.early_breaks, local.early_breaks);
        add(&self.nodes_visited, local.nodes_visited);
        add(&self.leaves_visited, local.leaves_visited);
        add(&self.columns_scanned, local.columns_scanned);
    }

    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            objects_compared: self.objects_compared.load(Ordering::Relaxed),
            early_breaks: self.early_breaks.load(Ordering::Relaxed),
            nodes_visited: self.nodes_visited.load(Ordering::Relaxed),
            leaves_visited: self.leaves_visited.load(Ordering::Relaxed),
            columns_scanned: self.columns_scanned.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.objects_compared.store(0, Ordering::Relaxed);
        self.early_breaks.store(0, Ordering::Relaxed);
        self.nodes_visited.store(0, Ordering::Relaxed);
        self.leaves_visited.store(0, Ordering::Relaxed);
        self.columns_scanned.store(0, Ordering::Relaxed);
    }
}

impl CounterSnapshot {
    pub fn saturating_sub(&self, earlier: &CounterSnapshot) -> CounterSnapshot {
        CounterSnapshot {
            objects_compared: self
                .objects_compared
                .saturating_sub(earlier.objects_compared),
            early_breaks: self.early_breaks.saturating_sub(earlier.early_breaks),
            nodes_visited: self.nodes_visited.saturating_sub(earlier.nodes_visited),
            leaves_visited: self.leaves_visited.saturating_sub(earlier.leaves_visited),
            columns_scanned: self.columns_scanned.saturating_sub(earlier.columns_scanned),
        }
    }
}
