//! In-memory kd-tree: one object per node, delimiter dimension chosen
//! round-robin by depth, objects inserted one at a time.
//!
//! Nodes live in a contiguous pool in insertion order; node `i`'s object is
//! `points[i*m..(i+1)*m]`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::counters::CounterSnapshot;
use crate::data::ObjectId;
use crate::error::{Error, Result};
use crate::kernel::MatchKernel;
use crate::method::{AccessMethod, MethodBuilder};
use crate::parallel::Partition;
use crate::query::{RangeQuery, ResultSet};

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct KdNode {
    id: ObjectId,
    left: u32,
    right: u32,
    dim: u32,
}

/// Read-only view of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdNodeRef<'a> {
    pub index: usize,
    pub object_id: ObjectId,
    pub object: &'a [f32],
    pub delimiter_dim: usize,
    pub left: Option<usize>,
    pub right: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dims: usize,
    kernel: MatchKernel,
    nodes: Vec<KdNode>,
    points: Vec<f32>,
}

impl KdTree {
    pub fn new(dims: usize, kernel: MatchKernel) -> Self {
        Self {
            dims,
            kernel,
            nodes: Vec::new(),
            points: Vec::new(),
        }
    }

    /// Inserts objects in a seeded random order.
    pub fn build(partition: Partition, kernel: MatchKernel, seed: u64) -> Self {
        let mut tree = Self::new(partition.dims, kernel);
        tree.nodes.reserve(partition.len());
        tree.points.reserve(partition.values.len());
        let mut order: Vec<usize> = (0..partition.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        for i in order {
            tree.insert_unchecked(partition.row(i), partition.ids[i]);
        }
        tree
    }

    /// Descends comparing on each node's delimiter dimension (`<=` goes left)
    /// and attaches a new leaf at the first empty slot.
    pub fn insert(&mut self, object: &[f32], id: ObjectId) -> Result<()> {
        if object.len() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                found: object.len(),
            });
        }
        self.insert_unchecked(object, id);
        Ok(())
    }

    fn insert_unchecked(&mut self, object: &[f32], id: ObjectId) {
        let new = self.nodes.len() as u32;
        let dim = if self.nodes.is_empty() {
            0
        } else {
            let mut cur = 0usize;
            loop {
                let node = self.nodes[cur];
                let d = node.dim as usize;
                let go_left = object[d] <= self.points[cur * self.dims + d];
                let next = if go_left { node.left } else { node.right };
                if next == NIL {
                    let slot = &mut self.nodes[cur];
                    if go_left {
                        slot.left = new;
                    } else {
                        slot.right = new;
                    }
                    break (d + 1) % self.dims;
                }
                cur = next as usize;
            }
        };
        self.nodes.push(KdNode {
            id,
            left: NIL,
            right: NIL,
            dim: dim as u32,
        });
        self.points.extend_from_slice(object);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn root(&self) -> Option<KdNodeRef<'_>> {
        (!self.nodes.is_empty()).then(|| self.node(0))
    }

    pub fn node(&self, index: usize) -> KdNodeRef<'_> {
        let n = self.nodes[index];
        let opt = |c: u32| (c != NIL).then_some(c as usize);
        KdNodeRef {
            index,
            object_id: n.id,
            object: self.point(index),
            delimiter_dim: n.dim as usize,
            left: opt(n.left),
            right: opt(n.right),
        }
    }

    #[inline]
    fn point(&self, index: usize) -> &[f32] {
        &self.points[index * self.dims..(index + 1) * self.dims]
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
        query.check_dims(self.dims)?;
        let mut out = Vec::new();
        self.search_into(query, &mut out, stats);
        Ok(ResultSet::from_unsorted(out))
    }

    fn collect(&self, query: &RangeQuery, out: &mut Vec<ObjectId>, stats: &mut CounterSnapshot) {
        if self.nodes.is_empty() {
            return;
        }
        let (lower, upper) = (query.lower(), query.upper());
        let mut visited = 0u64;
        let mut rejected = 0u64;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(i) = stack.pop() {
            let i = i as usize;
            visited += 1;
            let node = self.nodes[i];
            let object = self.point(i);
            if self.kernel.matches_bounds(object, lower, upper) {
                out.push(node.id);
            } else {
                rejected += 1;
            }
            let d = node.dim as usize;
            let v = object[d];
            if node.right != NIL && upper[d] > v {
                stack.push(node.right);
            }
            if node.left != NIL && lower[d] <= v {
                stack.push(node.left);
            }
        }
        stats.nodes_visited += visited;
        stats.objects_compared += visited;
        stats.early_breaks += rejected;
    }

    /// Verifies the per-delimiter ordering at every node against all of its
    /// ancestors, round-robin delimiter dimensions, and id uniqueness.
    pub fn audit(&self) -> std::result::Result<KdAudit, String> {
        let mut report = KdAudit::default();
        if self.nodes.is_empty() {
            return Ok(report);
        }
        let mut seen = std::collections::HashSet::with_capacity(self.nodes.len());
        // Per dimension: value must be > low (exclusive) and <= high (inclusive).
        let unbounded = vec![(f32::NEG_INFINITY, f32::INFINITY); self.dims];
        let mut stack = vec![(0usize, 0usize, unbounded)];
        let mut depth_sum = 0usize;
        while let Some((i, depth, bounds)) = stack.pop() {
            let node = self.nodes[i];
            let object = self.point(i);
            for (j, (&v, &(lo, hi))) in object.iter().zip(&bounds).enumerate() {
                if !(v > lo && v <= hi) {
                    return Err(format!(
                        "node {i} (id {}) value {v} in dim {j} violates ancestor range ({lo}, {hi}]",
                        node.id
                    ));
                }
            }
            if !seen.insert(node.id) {
                return Err(format!("id {} stored twice", node.id));
            }
            if i == 0 && node.dim != 0 {
                return Err("root does not split dimension 0".into());
            }
            report.nodes += 1;
            report.max_depth = report.max_depth.max(depth);
            depth_sum += depth;
            let d = node.dim as usize;
            let next_dim = ((d + 1) % self.dims) as u32;
            for (child, left) in [(node.left, true), (node.right, false)] {
                if child == NIL {
                    continue;
                }
                if self.nodes[child as usize].dim != next_dim {
                    return Err(format!(
                        "child {child} of node {i} breaks round-robin order"
                    ));
                }
                let mut b = bounds.clone();
                if left {
                    b[d].1 = b[d].1.min(object[d]);
                } else {
                    b[d].0 = b[d].0.max(object[d]);
                }
                stack.push((child as usize, depth + 1, b));
            }
        }
        if report.nodes != self.nodes.len() {
            return Err(format!(
                "{} nodes reachable, {} stored",
                report.nodes,
                self.nodes.len()
            ));
        }
        report.mean_depth = depth_sum as f64 / report.nodes as f64;
        Ok(report)
    }
}

/// Result of a successful [`KdTree::audit`]. Depth of the root is 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KdAudit {
    pub nodes: usize,
    pub max_depth: usize,
    pub mean_depth: f64,
}

impl AccessMethod for KdTree {
    fn dims(&self) -> usize {
        self.dims
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn search_into(
        &self,
        query: &RangeQuery,
        out: &mut Vec<ObjectId>,
        stats: &mut CounterSnapshot,
    ) {
        self.collect(query, out, stats)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KdTreeBuilder {
    pub kernel: MatchKernel,
    pub seed: u64,
}

impl MethodBuilder for KdTreeBuilder {
    type Method = KdTree;
    fn build(&self, partition: Partition) -> KdTree {
        // Derive a distinct insertion order per partition.
        let salt = partition.ids.first().copied().unwrap_or(0) as u64;
        KdTree::build(
            partition,
            self.kernel,
            self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        )
    }
}
