//! Horizontal partitioning: random balanced assignment of objects to `p`
//! partitions, one independent access-method instance per partition, and
//! fan-out/fan-in query execution.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::counters::{CounterSnapshot, Counters};
use crate::data::{DataSet, ObjectId};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::method::{AccessMethod, MethodBuilder};
use crate::query::{RangeQuery, ResultSet};

/// Assignment of every object to exactly one of `p` partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionLayout {
    seed: u64,
    assignment: Vec<u32>,
    /// Per partition, the original ids it holds, ascending.
    members: Vec<Vec<ObjectId>>,
}

impl PartitionLayout {
    /// Balanced random layout: a seeded permutation of `0..n` split into `p`
    /// contiguous runs whose sizes differ by at most one. `p > n` leaves some
    /// partitions empty.
    pub fn new(n: usize, p: usize, seed: u64) -> Result<Self> {
        if p == 0 {
            return Err(Error::ZeroPartitions);
        }
        let mut perm: Vec<ObjectId> = (0..n as ObjectId).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (base, extra) = (n / p, n % p);
        let mut assignment = vec![0u32; n];
        let mut members = Vec::with_capacity(p);
        let mut start = 0;
        for q in 0..p {
            let size = base + usize::from(q < extra);
            let mut ids = perm[start..start + size].to_vec();
            ids.sort_unstable();
            for &id in &ids {
                assignment[id as usize] = q as u32;
            }
            members.push(ids);
            start += size;
        }
        Ok(Self {
            seed,
            assignment,
            members,
        })
    }

    /// A single partition holding everything.
    pub fn single(n: usize) -> Self {
        Self::new(n, 1, 0).expect("p = 1")
    }

    pub fn partitions(&self) -> usize {
        self.members.len()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn partition_of(&self, id: ObjectId) -> usize {
        self.assignment[id as usize] as usize
    }

    pub fn members(&self, partition: usize) -> &[ObjectId] {
        &self.members[partition]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Copies each partition's rows into its own contiguous array.
    pub fn materialize(&self, data: &DataSet) -> Result<Vec<Partition>> {
        if data.len() != self.len() {
            return Err(Error::LayoutMismatch {
                layout: self.len(),
                data: data.len(),
            });
        }
        Ok(self
            .members
            .iter()
            .map(|ids| Partition::gather(data, ids.clone()))
            .collect())
    }
}

/// The objects of one partition, row-major, with their original ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub dims: usize,
    pub values: Vec<f32>,
    pub ids: Vec<ObjectId>,
}

impl Partition {
    pub fn gather(data: &DataSet, ids: Vec<ObjectId>) -> Self {
        let mut values = Vec::with_capacity(ids.len() * data.dims());
        for &id in &ids {
            values.extend_from_slice(data.row(id as usize));
        }
        Self {
            dims: data.dims(),
            values,
            ids,
        }
    }

    /// The whole dataset as one partition, ids `0..n`.
    pub fn whole(data: &DataSet) -> Self {
        Self {
            dims: data.dims(),
            values: data.values().to_vec(),
            ids: (0..data.len() as ObjectId).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }
}

/// `p` independent instances of one access method.
pub struct PartitionedIndex<M> {
    dims: usize,
    instances: Vec<M>,
    exec: Arc<Executor>,
    counters: Counters,
}

/// Builds one instance per partition; instances may be built concurrently.
pub fn build_partitioned<B: MethodBuilder>(
    builder: &B,
    data: &DataSet,
    layout: &PartitionLayout,
    exec: Arc<Executor>,
) -> Result<PartitionedIndex<B::Method>> {
    let parts = layout.materialize(data)?;
    let instances = exec.map_owned(parts, |part| builder.build(part));
    Ok(PartitionedIndex {
        dims: data.dims(),
        instances,
        exec,
        counters: Counters::new(),
    })
}

/// Searches every instance on its own worker, concatenates and sorts.
pub fn search_partitioned<M: AccessMethod>(
    index: &PartitionedIndex<M>,
    query: &RangeQuery,
) -> Result<ResultSet> {
    index.search(query)
}

impl<M: AccessMethod> PartitionedIndex<M> {
    pub fn search(&self, query: &RangeQuery) -> Result<ResultSet> {
        query.check_dims(self.dims)?;
        let partials = self.exec.map(&self.instances, |inst| {
            let mut out = Vec::new();
            let mut stats = CounterSnapshot::default();
            inst.search_into(query, &mut out, &mut stats);
            self.counters.add(&stats);
            out
        });
        let total = partials.iter().map(Vec::len).sum();
        let mut ids = Vec::with_capacity(total);
        for part in partials {
            ids.extend_from_slice(&part);
        }
        // Partitions are disjoint, so the concatenation has no duplicates.
        Ok(ResultSet::from_unsorted(ids))
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn instances(&self) -> &[M] {
        &self.instances
    }

    pub fn executor(&self) -> &Arc<Executor> {
        &self.exec
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    /// Objects stored across all instances.
    pub fn len(&self) -> usize {
        self.instances.iter().map(AccessMethod::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
