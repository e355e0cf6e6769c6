//! Vector-approximation file with a 2-bit equal-width grid per dimension.
//!
//! Occupied cells live in a sparse directory, so the structure stays
//! usable when `4^m` far exceeds the object count.

use std::collections::HashMap;
use std::fmt;

use crate::counters::CounterSnapshot;
use crate::data::{DataSet, ObjectId};
use crate::error::{Error, Result};
use crate::kernel::MatchKernel;
use crate::method::{AccessMethod, MethodBuilder};
use crate::parallel::Partition;
use crate::query::{RangeQuery, ResultSet};

pub const BITS_PER_DIM: usize = 2;
pub const INTERVALS: u8 = 1 << BITS_PER_DIM;
const DIMS_PER_WORD: usize = 64 / BITS_PER_DIM;

/// Equal-width grid over the observed per-dimension bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct VaGrid {
    min: Vec<f32>,
    max: Vec<f32>,
}

impl VaGrid {
    pub fn new(min: Vec<f32>, max: Vec<f32>) -> Result<Self> {
        if min.is_empty() {
            return Err(Error::ZeroDimensions);
        }
        if min.len() != max.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                found: max.len(),
            });
        }
        for (j, (&lo, &hi)) in min.iter().zip(&max).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::InvertedPredicate {
                    dim: j,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { min, max })
    }

    fn from_rows<'a>(dims: usize, rows: impl Iterator<Item = &'a [f32]>) -> Self {
        let mut min = vec![f32::INFINITY; dims];
        let mut max = vec![f32::NEG_INFINITY; dims];
        let mut any = false;
        for row in rows {
            any = true;
            for j in 0..dims {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        if !any {
            min.fill(0.0);
            max.fill(0.0);
        }
        Self { min, max }
    }

    pub fn dims(&self) -> usize {
        self.min.len()
    }

    pub fn total_bits(&self) -> usize {
        BITS_PER_DIM * self.dims()
    }

    pub fn bounds(&self, dim: usize) -> (f32, f32) {
        (self.min[dim], self.max[dim])
    }

    /// Interval index of `v` in dimension `dim`, clamped to the grid.
    pub fn interval(&self, dim: usize, v: f32) -> u8 {
        let (lo, hi) = (self.min[dim], self.max[dim]);
        if hi <= lo {
            return 0;
        }
        let t = (v as f64 - lo as f64) / (hi as f64 - lo as f64) * INTERVALS as f64;
        if t < 0.0 {
            0
        } else {
            (t.floor() as u64).min(INTERVALS as u64 - 1) as u8
        }
    }

    fn in_bounds(&self, dim: usize, v: f32) -> bool {
        v >= self.min[dim] && v <= self.max[dim]
    }
}

/// Packed interval indices, `BITS_PER_DIM` bits per dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellCode(Box<[u64]>);

impl CellCode {
    fn zeroed(dims: usize) -> Self {
        Self(vec![0; dims.div_ceil(DIMS_PER_WORD)].into_boxed_slice())
    }

    pub fn from_indices(indices: &[u8]) -> Self {
        let mut c = Self::zeroed(indices.len());
        for (j, &i) in indices.iter().enumerate() {
            c.set(j, i);
        }
        c
    }

    #[inline]
    pub fn get(&self, dim: usize) -> u8 {
        let shift = (dim % DIMS_PER_WORD) * BITS_PER_DIM;
        ((self.0[dim / DIMS_PER_WORD] >> shift) & (INTERVALS as u64 - 1)) as u8
    }

    #[inline]
    fn set(&mut self, dim: usize, index: u8) {
        debug_assert!(index < INTERVALS);
        let shift = (dim % DIMS_PER_WORD) * BITS_PER_DIM;
        let w = &mut self.0[dim / DIMS_PER_WORD];
        *w = (*w & !((INTERVALS as u64 - 1) << shift)) | ((index as u64) << shift);
    }

    pub fn indices(&self, dims: usize) -> Vec<u8> {
        (0..dims).map(|j| self.get(j)).collect()
    }
}

/// Cell code of `object`. Out-of-bounds values are clamped.
pub fn approximate(grid: &VaGrid, object: &[f32]) -> CellCode {
    let mut code = CellCode::zeroed(grid.dims());
    for (j, &v) in object.iter().enumerate() {
        if !grid.in_bounds(j, v) {
            log::debug!("value {v} outside grid bounds in dimension {j}; clamped");
        }
        code.set(j, grid.interval(j, v));
    }
    code
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bucket {
    pub ids: Vec<ObjectId>,
    /// Row-major objects in `ids` order.
    pub values: Vec<f32>,
}

impl Bucket {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Sparse directory from occupied cells to buckets.
#[derive(Debug, Clone, Default)]
pub struct BucketStore {
    dims: usize,
    codes: Vec<CellCode>,
    buckets: Vec<Bucket>,
    index: HashMap<CellCode, usize>,
}

impl BucketStore {
    pub fn new(dims: usize) -> Self {
        Self {
            dims,
            ..Self::default()
        }
    }

    pub fn insert(&mut self, code: CellCode, id: ObjectId, object: &[f32]) {
        let slot = match self.index.get(&code) {
            Some(&s) => s,
            None => {
                self.index.insert(code.clone(), self.codes.len());
                self.codes.push(code);
                self.buckets.push(Bucket::default());
                self.buckets.len() - 1
            }
        };
        let b = &mut self.buckets[slot];
        b.ids.push(id);
        b.values.extend_from_slice(object);
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn occupied(&self) -> usize {
        self.buckets.len()
    }

    pub fn len(&self) -> usize {
        self.buckets.iter().map(Bucket::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    pub fn get(&self, code: &CellCode) -> Option<&Bucket> {
        self.index.get(code).map(|&s| &self.buckets[s])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CellCode, &Bucket)> {
        self.codes.iter().zip(&self.buckets)
    }

    pub fn occupancy(&self) -> Occupancy {
        let sizes: Vec<usize> = self.buckets.iter().map(Bucket::len).collect();
        let total: usize = sizes.iter().sum();
        Occupancy {
            cells: sizes.len(),
            min: sizes.iter().copied().min().unwrap_or(0),
            max: sizes.iter().copied().max().unwrap_or(0),
            mean: if sizes.is_empty() {
                0.0
            } else {
                total as f64 / sizes.len() as f64
            },
        }
    }
}

/// Occupied-cell count and bucket-size summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupancy {
    pub cells: usize,
    pub min: usize,
    pub mean: f64,
    pub max: usize,
}

impl fmt::Display for Occupancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cells={} min={} mean={:.1} max={}",
            self.cells, self.min, self.mean, self.max
        )
    }
}

/// How candidate cells are found.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CandidateEnumeration {
    /// The cheaper of the two below, by candidate count.
    #[default]
    Auto,
    /// Look up every cell of the admissible index ranges.
    Product,
    /// Test every occupied cell against the admissible ranges.
    Occupied,
}

#[derive(Debug, Clone)]
pub struct VaFile {
    grid: VaGrid,
    store: BucketStore,
    kernel: MatchKernel,
    enumeration: CandidateEnumeration,
}

pub fn va_build(data: &DataSet) -> (VaGrid, BucketStore) {
    let (grid, store) = build_rows(
        data.dims(),
        data.rows().enumerate().map(|(i, r)| (i as ObjectId, r)),
    );
    (grid, store)
}

fn build_rows<'a>(
    dims: usize,
    rows: impl Iterator<Item = (ObjectId, &'a [f32])> + Clone,
) -> (VaGrid, BucketStore) {
    let grid = VaGrid::from_rows(dims, rows.clone().map(|(_, r)| r));
    let mut store = BucketStore::new(dims);
    for (id, row) in rows {
        store.insert(approximate(&grid, row), id, row);
    }
    (grid, store)
}

pub fn va_range_search(
    grid: &VaGrid,
    store: &BucketStore,
    query: &RangeQuery,
    kernel: MatchKernel,
) -> Result<ResultSet> {
    query.check_dims(grid.dims())?;
    let mut out = Vec::new();
    let mut stats = CounterSnapshot::default();
    search(
        grid,
        store,
        query,
        kernel,
        CandidateEnumeration::Auto,
        &mut out,
        &mut stats,
    );
    Ok(ResultSet::from_unsorted(out))
}

/// Admissible interval-index range per dimension, or `None` if the query
/// misses the grid in some dimension.
fn admissible(grid: &VaGrid, query: &RangeQuery) -> Option<Vec<(u8, u8)>> {
    (0..grid.dims())
        .map(|j| {
            if !query.is_queried(j) {
                return Some((0, INTERVALS - 1));
            }
            let (lo, hi) = grid.bounds(j);
            if query.upper()[j] < lo || query.lower()[j] > hi {
                return None;
            }
            Some((
                grid.interval(j, query.lower()[j]),
                grid.interval(j, query.upper()[j]),
            ))
        })
        .collect()
}

fn search(
    grid: &VaGrid,
    store: &BucketStore,
    query: &RangeQuery,
    kernel: MatchKernel,
    mode: CandidateEnumeration,
    out: &mut Vec<ObjectId>,
    stats: &mut CounterSnapshot,
) {
    if store.is_empty() {
        return;
    }
    let Some(ranges) = admissible(grid, query) else {
        return;
    };
    let m = grid.dims();
    let mut scan = |bucket: &Bucket| {
        stats.nodes_visited += 1;
        stats.objects_compared += bucket.len() as u64;
        for (k, &id) in bucket.ids.iter().enumerate() {
            if kernel.matches_bounds(
                &bucket.values[k * m..(k + 1) * m],
                query.lower(),
                query.upper(),
            ) {
                out.push(id);
            } else {
                stats.early_breaks += 1;
            }
        }
    };

    let product = ranges
        .iter()
        .try_fold(1usize, |acc, &(l, u)| acc.checked_mul((u - l + 1) as usize));
    let use_product = match mode {
        CandidateEnumeration::Product => true,
        CandidateEnumeration::Occupied => false,
        CandidateEnumeration::Auto => product.is_some_and(|p| p <= store.occupied()),
    };

    if use_product {
        let mut idx: Vec<u8> = ranges.iter().map(|r| r.0).collect();
        let mut code = CellCode::from_indices(&idx);
        loop {
            if let Some(b) = store.get(&code) {
                scan(b);
            }
            // Odometer over the admissible ranges.
            let mut j = 0;
            loop {
                if j == m {
                    return;
                }
                if idx[j] < ranges[j].1 {
                    idx[j] += 1;
                    code.set(j, idx[j]);
                    break;
                }
                idx[j] = ranges[j].0;
                code.set(j, idx[j]);
                j += 1;
            }
        }
    } else {
        for (code, bucket) in store.iter() {
            let inside = ranges.iter().enumerate().all(|(j, &(l, u))| {
                let i = code.get(j);
                l <= i && i <= u
            });
            if inside {
                scan(bucket);
            }
        }
    }
}

impl VaFile {
    pub fn build(data: &DataSet, kernel: MatchKernel) -> Self {
        let (grid, store) = va_build(data);
        Self::from_parts(grid, store, kernel)
    }

    /// Grid bounds come from the partition's own objects.
    pub fn from_partition(partition: &Partition, kernel: MatchKernel) -> Self {
        let rows = partition
            .ids
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, partition.row(i)));
        let (grid, store) = build_rows(partition.dims, rows);
        Self::from_parts(grid, store, kernel)
    }

    pub fn from_parts(grid: VaGrid, store: BucketStore, kernel: MatchKernel) -> Self {
        Self {
            grid,
            store,
            kernel,
            enumeration: CandidateEnumeration::Auto,
        }
    }

    pub fn with_enumeration(mut self, mode: CandidateEnumeration) -> Self {
        self.enumeration = mode;
        self
    }

    pub fn grid(&self) -> &VaGrid {
        &self.grid
    }

    pub fn store(&self) -> &BucketStore {
        &self.store
    }

    pub fn occupancy(&self) -> Occupancy {
        self.store.occupancy()
    }

    pub fn range_search(&self, query: &RangeQuery) -> Result<ResultSet> {
        let mut stats = CounterSnapshot::default();
        self.range_search_counted(query, &mut stats)
    }

    pub fn range_search_counted(
        &self,
        query: &RangeQuery,
        stats: &mut CounterSnapshot,
    ) -> Result<ResultSet> {
        query.check_dims(self.grid.dims())?;
        let mut out = Vec::new();
        search(
            &self.grid,
            &self.store,
            query,
            self.kernel,
            self.enumeration,
            &mut out,
            stats,
        );
        Ok(ResultSet::from_unsorted(out))
    }

    /// Checks that every stored object sits in the bucket of its own cell,
    /// ids are unique, and bucket sizes sum to `expected`.
    pub fn audit(&self, expected: usize) -> std::result::Result<(), String> {
        let m = self.grid.dims();
        let mut seen = std::collections::HashSet::new();
        for (code, bucket) in self.store.iter() {
            if bucket.is_empty() {
                return Err("empty bucket in directory".into());
            }
            if bucket.values.len() != bucket.len() * m {
                return Err("bucket value buffer length mismatch".into());
            }
            for (k, &id) in bucket.ids.iter().enumerate() {
                let obj = &bucket.values[k * m..(k + 1) * m];
                if &approximate(&self.grid, obj) != code {
                    return Err(format!("object {id} stored under the wrong cell"));
                }
                if !seen.insert(id) {
                    return Err(format!("object {id} stored twice"));
                }
            }
        }
        let total = self.store.len();
        if total != expected {
            return Err(format!("bucket sizes sum to {total}, expected {expected}"));
        }
        Ok(())
    }
}

impl AccessMethod for VaFile {
    fn dims(&self) -> usize {
        self.grid.dims()
    }

    fn len(&self) -> usize {
        self.store.len()
    }

    fn search_into(
        &self,
        query: &RangeQuery,
        out: &mut Vec<ObjectId>,
        stats: &mut CounterSnapshot,
    ) {
        search(
            &self.grid,
            &self.store,
            query,
            self.kernel,
            self.enumeration,
            out,
            stats,
        )
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VaFileBuilder {
    pub kernel: MatchKernel,
}

impl MethodBuilder for VaFileBuilder {
    type Method = VaFile;
    fn build(&self, partition: Partition) -> VaFile {
        VaFile::from_partition(&partition, self.kernel)
    }
}
