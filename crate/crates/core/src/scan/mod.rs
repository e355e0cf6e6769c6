//! Scan-based executors: single-threaded sequential, horizontally partitioned
//! parallel, and vertically partitioned (columnar) parallel.
//!
//! Row-wise scans evaluate every dimension in index order, sentinel
//! dimensions included; no selectivity-based reordering is applied.

mod bitmask;
mod vertical;

use std::sync::Arc;

pub use bitmask::BitMask;
pub use vertical::{chunked_and, scan_column, vertical_scan, ColumnSet, VerticalScan};

use crate::counters::{CounterSnapshot, Counters};
use crate::data::{DataSet, ObjectId};
use crate::error::Result;
use crate::exec::Executor;
use crate::kernel::MatchKernel;
use crate::method::{AccessMethod, MethodBuilder};
use crate::parallel::{build_partitioned, Partition, PartitionLayout, PartitionedIndex};
use crate::query::{RangeQuery, ResultSet};

/// Ids of all objects matching `query`, ascending.
pub fn sequential_scan(
    data: &DataSet,
    query: &RangeQuery,
    kernel: MatchKernel,
) -> Result<ResultSet> {
    let mut stats = CounterSnapshot::default();
    sequential_scan_counted(data, query, kernel, &mut stats)
}

pub fn sequential_scan_counted(
    data: &DataSet,
    query: &RangeQuery,
    kernel: MatchKernel,
    stats: &mut CounterSnapshot,
) -> Result<ResultSet> {
    query.check_dims(data.dims())?;
    let mut ids = Vec::new();
    scan_rows(data.values(), data.dims(), query, kernel, stats, |i| {
        ids.push(i as ObjectId)
    });
    Ok(ResultSet::from_sorted(ids))
}

#[inline]
fn scan_rows(
    values: &[f32],
    dims: usize,
    query: &RangeQuery,
    kernel: MatchKernel,
    stats: &mut CounterSnapshot,
    mut emit: impl FnMut(usize),
) {
    let (lower, upper) = (query.lower(), query.upper());
    let mut rejected = 0u64;
    let mut rows = 0u64;
    for (i, row) in values.chunks_exact(dims).enumerate() {
        rows += 1;
        if kernel.matches_bounds(row, lower, upper) {
            emit(i);
        } else {
            rejected += 1;
        }
    }
    stats.objects_compared += rows;
    stats.early_breaks += rejected;
}

/// A full scan over one in-memory array of objects.
#[derive(Debug, Clone)]
pub struct ScanInstance {
    part: Partition,
    kernel: MatchKernel,
}

impl ScanInstance {
    pub fn new(part: Partition, kernel: MatchKernel) -> Self {
        Self { part, kernel }
    }
}

impl AccessMethod for ScanInstance {
    fn dims(&self) -> usize {
        self.part.dims
    }

    fn len(&self) -> usize {
        self.part.len()
    }

    fn search_into(
        &self,
        query: &RangeQuery,
        out: &mut Vec<ObjectId>,
        stats: &mut CounterSnapshot,
    ) {
        let ids = &self.part.ids;
        scan_rows(
            &self.part.values,
            self.part.dims,
            query,
            self.kernel,
            stats,
            |i| out.push(ids[i]),
        );
    }
}

/// Builds [`ScanInstance`]s.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScanBuilder {
    pub kernel: MatchKernel,
}

impl MethodBuilder for ScanBuilder {
    type Method = ScanInstance;
    fn build(&self, partition: Partition) -> ScanInstance {
        ScanInstance::new(partition, self.kernel)
    }
}

/// Parallel scan over `p` independent row-major partition arrays, one worker per partition.
pub struct HorizontalScan {
    index: PartitionedIndex<ScanInstance>,
}

impl HorizontalScan {
    pub fn new(
        data: &DataSet,
        layout: &PartitionLayout,
        kernel: MatchKernel,
        exec: Arc<Executor>,
    ) -> Result<Self> {
        let index = build_partitioned(&ScanBuilder { kernel }, data, layout, exec)?;
        Ok(Self { index })
    }

    pub fn search(&self, query: &RangeQuery) -> Result<ResultSet> {
        self.index.search(query)
    }

    pub fn partition_sizes(&self) -> Vec<usize> {
        self.index
            .instances()
            .iter()
            .map(AccessMethod::len)
            .collect()
    }

    pub fn counters(&self) -> &Counters {
        self.index.counters()
    }

    pub fn index(&self) -> &PartitionedIndex<ScanInstance> {
        &self.index
    }
}

/// One-shot horizontal scan: partitions `data` per `layout` and runs `query`.
/// Repeated queries should reuse a [`HorizontalScan`].
pub fn horizontal_scan(
    data: &DataSet,
    layout: &PartitionLayout,
    query: &RangeQuery,
    kernel: MatchKernel,
    exec: Arc<Executor>,
) -> Result<ResultSet> {
    HorizontalScan::new(data, layout, kernel, exec)?.search(query)
}
