use std::sync::Arc;

use super::bitmask::{extract_ids, BitMask};
use crate::counters::{CounterSnapshot, Counters};
use crate::data::{DataSet, ObjectId};
use crate::error::{Error, Result};
use crate::exec::{chunk_ranges, Executor};
use crate::kernel::LANES;
use crate::query::{RangeQuery, ResultSet};

/// `m` one-dimensional arrays; column `j` holds dimension `j` of every object.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSet {
    len: usize,
    columns: Vec<Vec<f32>>,
}

impl ColumnSet {
    pub fn from_dataset(data: &DataSet) -> Self {
        let mut columns = vec![Vec::with_capacity(data.len()); data.dims()];
        for row in data.rows() {
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self {
            len: data.len(),
            columns,
        }
    }

    /// Transposes back to row-major.
    pub fn to_dataset(&self) -> Result<DataSet> {
        let mut values = Vec::with_capacity(self.len * self.dims());
        for i in 0..self.len {
            values.extend(self.columns.iter().map(|c| c[i]));
        }
        DataSet::new(self.dims(), values)
    }

    pub fn dims(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn column(&self, dim: usize) -> &[f32] {
        &self.columns[dim]
    }
}

/// One-dimensional range scan producing a match bit per value. Values are
/// compared in blocks of [`LANES`] against both boundaries; each block yields
/// one byte of the mask. The `n mod LANES` tail is scanned scalar.
pub fn scan_column(column: &[f32], lower: f32, upper: f32) -> BitMask {
    let n = column.len();
    let mut words = vec![0u64; n.div_ceil(64)];
    let blocks = column.chunks_exact(LANES);
    let tail = blocks.remainder();
    for (b, block) in blocks.enumerate() {
        let block: &[f32; LANES] = block.try_into().unwrap();
        let mut mask = 0u64;
        for (l, &v) in block.iter().enumerate() {
            mask |= ((lower <= v) as u64 & (upper >= v) as u64) << l;
        }
        words[b / 8] |= mask << ((b % 8) * 8);
    }
    let base = n - tail.len();
    for (k, &v) in tail.iter().enumerate() {
        if lower <= v && v <= upper {
            let i = base + k;
            words[i / 64] |= 1 << (i % 64);
        }
    }
    BitMask::from_words(n, words)
}

/// ANDs `masks` in `chunks` contiguous word ranges processed concurrently.
/// Returns one word vector per chunk; their concatenation is the full AND.
pub fn chunked_and(masks: &[BitMask], chunks: usize, exec: &Executor) -> Vec<Vec<u64>> {
    assert!(!masks.is_empty(), "need at least one mask");
    let words = masks[0].words().len();
    let ranges = chunk_ranges(words, chunks);
    exec.map(&ranges, |range| {
        range
            .clone()
            .map(|w| masks.iter().fold(u64::MAX, |acc, m| acc & m.words()[w]))
            .collect()
    })
}

/// Columnar scan: one worker per queried dimension, bitmask AND merge in `t` chunks.
pub struct VerticalScan {
    columns: ColumnSet,
    exec: Arc<Executor>,
    merge_chunks: usize,
    counters: Counters,
}

impl VerticalScan {
    /// Merge chunk count defaults to the executor's worker count.
    pub fn new(columns: ColumnSet, exec: Arc<Executor>) -> Self {
        let merge_chunks = exec.threads();
        Self {
            columns,
            exec,
            merge_chunks,
            counters: Counters::new(),
        }
    }

    pub fn from_dataset(data: &DataSet, exec: Arc<Executor>) -> Self {
        Self::new(ColumnSet::from_dataset(data), exec)
    }

    pub fn with_merge_chunks(mut self, chunks: usize) -> Result<Self> {
        if chunks == 0 {
            return Err(Error::ZeroThreads);
        }
        self.merge_chunks = chunks;
        Ok(self)
    }

    pub fn merge_chunks(&self) -> usize {
        self.merge_chunks
    }

    pub fn columns(&self) -> &ColumnSet {
        &self.columns
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    /// A query without any real predicate returns every id.
    pub fn search(&self, query: &RangeQuery) -> Result<ResultSet> {
        query.check_dims(self.columns.dims())?;
        let dims: Vec<usize> = query.queried_dims().collect();
        if dims.is_empty() {
            return Ok(ResultSet::all(self.columns.len()));
        }
        let masks = self.exec.map(&dims, |&j| {
            scan_column(self.columns.column(j), query.lower()[j], query.upper()[j])
        });
        self.counters.add(&CounterSnapshot {
            columns_scanned: dims.len() as u64,
            ..Default::default()
        });

        let words = masks[0].words().len();
        let ranges = chunk_ranges(words, self.merge_chunks);
        let partials: Vec<Vec<ObjectId>> = self.exec.map(&ranges, |range| {
            let mut merged = Vec::with_capacity(range.len());
            for w in range.clone() {
                merged.push(masks.iter().fold(u64::MAX, |acc, m| acc & m.words()[w]));
            }
            let mut ids = Vec::new();
            extract_ids(&merged, range.start, &mut ids);
            ids
        });
        let mut ids = Vec::with_capacity(partials.iter().map(Vec::len).sum());
        for p in partials {
            ids.extend_from_slice(&p);
        }
        Ok(ResultSet::from_sorted(ids))
    }
}

/// One-shot vertical scan with `exec.threads()` merge chunks.
pub fn vertical_scan(
    columns: &ColumnSet,
    query: &RangeQuery,
    exec: Arc<Executor>,
) -> Result<ResultSet> {
    VerticalScan::new(columns.clone(), exec).search(query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::MatchKernel;
    use crate::scan::sequential_scan;

    fn sample() -> DataSet {
        let values: Vec<f32> = (0..57 * 3)
            .map(|i| ((i * 37) % 101) as f32 / 100.0)
            .collect();
        DataSet::new(3, values).unwrap()
    }

    #[test]
    fn transpose_round_trip() {
        let d = sample();
        let cols = ColumnSet::from_dataset(&d);
        assert_eq!(cols.len(), 57);
        assert_eq!(cols.column(1)[2], d.row(2)[1]);
        assert_eq!(cols.to_dataset().unwrap(), d);
    }

    #[test]
    fn column_scan_matches_scalar_per_bit() {
        let col: Vec<f32> = (0..77).map(|i| (i % 10) as f32).collect();
        let mask = scan_column(&col, 3.0, 6.0);
        for (i, &v) in col.iter().enumerate() {
            assert_eq!(mask.get(i), (3.0..=6.0).contains(&v), "bit {i}");
        }
    }

    #[test]
    fn only_queried_columns_are_scanned() {
        let d = DataSet::new(19, vec![0.5; 19 * 10]).unwrap();
        let scan = VerticalScan::from_dataset(&d, Arc::new(Executor::sequential()));
        let q = RangeQuery::unbounded(19)
            .with_predicate(0, 0.0, 1.0)
            .unwrap()
            .with_predicate(4, 0.0, 1.0)
            .unwrap()
            .with_predicate(18, 0.4, 0.6)
            .unwrap();
        assert_eq!(scan.search(&q).unwrap().len(), 10);
        assert_eq!(scan.counters().snapshot().columns_scanned, 3);
    }

    #[test]
    fn zero_queried_dims_returns_all() {
        let d = sample();
        let scan = VerticalScan::from_dataset(&d, Arc::new(Executor::sequential()));
        assert_eq!(
            scan.search(&RangeQuery::unbounded(3)).unwrap(),
            ResultSet::all(57)
        );
        assert_eq!(scan.counters().snapshot().columns_scanned, 0);
    }

    #[test]
    fn chunked_and_concatenates_to_whole_and() {
        let n = 1000;
        let a = BitMask::from_bools(&(0..n).map(|i| i % 3 == 0).collect::<Vec<_>>());
        let b = BitMask::from_bools(&(0..n).map(|i| i % 5 != 1).collect::<Vec<_>>());
        let mut whole = a.clone();
        whole.and_assign(&b);
        let exec = Executor::with_threads(3).unwrap();
        for t in [1, 2, 3, 7, 40] {
            let chunks = chunked_and(&[a.clone(), b.clone()], t, &exec);
            assert_eq!(chunks.len(), t);
            let concat: Vec<u64> = chunks.concat();
            assert_eq!(concat, whole.words());
        }
    }

    #[test]
    fn equals_sequential_for_any_chunk_count() {
        let d = sample();
        let q = RangeQuery::new(vec![0.1, 0.2, 0.0], vec![0.8, 0.9, 0.5]).unwrap();
        let expected = sequential_scan(&d, &q, MatchKernel::SCALAR).unwrap();
        let exec = Executor::with_threads(2).unwrap();
        for t in 1..5 {
            let scan = VerticalScan::from_dataset(&d, exec.clone())
                .with_merge_chunks(t)
                .unwrap();
            assert_eq!(scan.search(&q).unwrap(), expected);
        }
    }
}
