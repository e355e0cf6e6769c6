//! In-memory R*-tree over points.
//!
//! Insertion follows Beckmann et al.: ChooseSubtree by least overlap
//! enlargement when the children are leaves and least area enlargement above;
//! the first overflow on a level during one insertion forcibly reinserts the
//! entries farthest from the node's center, later overflows split along the
//! axis of minimum margin sum at the distribution of minimum overlap.
//!
//! Points are stored as degenerate rectangles so both node kinds share the
//! same entry layout (see [`mbr`]).

mod audit;
pub mod mbr;
mod split;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use audit::{RStarAudit, RStarStats};
pub use mbr::{mbr_intersects, Mbr, MbrLanes};

use crate::counters::CounterSnapshot;
use crate::data::ObjectId;
use crate::error::{Error, Result};
use crate::kernel::MatchKernel;
use crate::method::{AccessMethod, MethodBuilder};
use crate::parallel::Partition;
use crate::query::{RangeQuery, ResultSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RStarConfig {
    pub leaf_capacity: usize,
    pub inner_capacity: usize,
    /// Minimum fill of non-root nodes as a fraction of capacity.
    pub min_fill: f64,
    /// Fraction of an overflowing node's entries that are reinserted.
    pub reinsert_fraction: f64,
    /// Entries (by least area enlargement) considered for the overlap test
    /// when choosing among leaves.
    pub overlap_candidates: usize,
    pub mbr_lanes: MbrLanes,
    pub kernel: MatchKernel,
}

impl Default for RStarConfig {
    fn default() -> Self {
        Self {
            leaf_capacity: 96,
            inner_capacity: 96,
            min_fill: 0.4,
            reinsert_fraction: 0.3,
            overlap_candidates: 32,
            mbr_lanes: MbrLanes::Eight,
            kernel: MatchKernel::default(),
        }
    }
}

impl RStarConfig {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            leaf_capacity: capacity,
            inner_capacity: capacity,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.leaf_capacity < 2 || self.inner_capacity < 2 {
            return Err(Error::Config(
                "R*-tree capacities must be at least 2".into(),
            ));
        }
        if !(0.0..=0.5).contains(&self.min_fill) {
            return Err(Error::Config("min_fill must lie in [0, 0.5]".into()));
        }
        if !(0.0..1.0).contains(&self.reinsert_fraction) {
            return Err(Error::Config("reinsert_fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }

    fn capacity(&self, level: u32) -> usize {
        if level == 0 {
            self.leaf_capacity
        } else {
            self.inner_capacity
        }
    }

    pub(crate) fn min_entries(&self, level: u32) -> usize {
        ((self.capacity(level) as f64 * self.min_fill).floor() as usize).max(1)
    }

    fn reinsert_count(&self, entries: usize) -> usize {
        (self.reinsert_fraction * entries as f64).ceil() as usize
    }
}

/// Insertion event counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InsertStats {
    pub forced_reinserts: u64,
    pub reinserted_entries: u64,
    pub splits: u64,
}

/// A node; entry `k` is `refs[k]` (object id at leaves, child node index
/// otherwise) with rectangle `rects[k*2m..(k+1)*2m]`.
#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub(crate) level: u32,
    pub(crate) refs: Vec<u32>,
    pub(crate) rects: Vec<f32>,
}

impl Node {
    fn new(level: u32) -> Self {
        Self {
            level,
            refs: Vec::new(),
            rects: Vec::new(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.refs.len()
    }

    pub(crate) fn rect(&self, k: usize, m2: usize) -> &[f32] {
        &self.rects[k * m2..(k + 1) * m2]
    }

    fn push(&mut self, rect: &[f32], r: u32) {
        self.refs.push(r);
        self.rects.extend_from_slice(rect);
    }
}

#[derive(Debug, Clone)]
pub struct RStarTree {
    dims: usize,
    config: RStarConfig,
    pub(crate) nodes: Vec<Node>,
    pub(crate) root: u32,
    len: usize,
    stats: InsertStats,
}

impl RStarTree {
    pub fn new(dims: usize, config: RStarConfig) -> Result<Self> {
        if dims == 0 {
            return Err(Error::ZeroDimensions);
        }
        config.validate()?;
        Ok(Self {
            dims,
            config,
            nodes: vec![Node::new(0)],
            root: 0,
            len: 0,
            stats: InsertStats::default(),
        })
    }

    /// Incremental insertion in a seeded random order; no bulk loading.
    pub fn build(partition: Partition, config: RStarConfig, seed: u64) -> Result<Self> {
        let mut tree = Self::new(partition.dims, config)?;
        let mut order: Vec<usize> = (0..partition.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        for i in order {
            tree.insert_point(partition.row(i), partition.ids[i]);
        }
        Ok(tree)
    }

    pub fn insert(&mut self, object: &[f32], id: ObjectId) -> Result<()> {
        if object.len() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                found: object.len(),
            });
        }
        self.insert_point(object, id);
        Ok(())
    }

    fn insert_point(&mut self, object: &[f32], id: ObjectId) {
        let mut rect = Vec::with_capacity(2 * self.dims);
        rect.extend_from_slice(object);
        rect.extend_from_slice(object);
        let mut reinserted = vec![false; self.height() as usize + 1];
        self.insert_entry(&rect, id, 0, &mut reinserted);
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn config(&self) -> &RStarConfig {
        &self.config
    }

    /// Level of the root; leaves are level 0.
    pub fn height(&self) -> u32 {
        self.nodes[self.root as usize].level
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn insert_stats(&self) -> InsertStats {
        self.stats
    }

    /// Bounding box of all stored points, `None` when empty.
    pub fn root_mbr(&self) -> Option<Mbr> {
        (!self.is_empty()).then(|| Mbr::from_flat(&self.node_mbr(self.root)))
    }

    fn m2(&self) -> usize {
        2 * self.dims
    }

    pub(crate) fn node_mbr(&self, n: u32) -> Vec<f32> {
        let node = &self.nodes[n as usize];
        let m2 = self.m2();
        let mut acc = mbr::empty_rect(self.dims);
        for k in 0..node.len() {
            mbr::expand(&mut acc, node.rect(k, m2));
        }
        acc
    }

    /// Inserts an entry into a node on `level`, then walks back up the
    /// descent path adjusting rectangles and treating overflows.
    fn insert_entry(&mut self, rect: &[f32], r: u32, level: u32, reinserted: &mut Vec<bool>) {
        let mut path = vec![self.root];
        let mut node = self.root;
        while self.nodes[node as usize].level > level {
            let k = self.choose_subtree(node, rect);
            node = self.nodes[node as usize].refs[k];
            path.push(node);
        }
        self.nodes[node as usize].push(rect, r);

        let mut sibling: Option<u32> = None;
        for i in (0..path.len()).rev() {
            let n = path[i];
            if let Some(s) = sibling.take() {
                let rect = self.node_mbr(s);
                self.nodes[n as usize].push(&rect, s);
            }
            if i + 1 < path.len() {
                self.refresh_entry(n, path[i + 1]);
            }
            let node_level = self.nodes[n as usize].level;
            if self.nodes[n as usize].len() <= self.config.capacity(node_level) {
                continue;
            }
            let lvl = node_level as usize;
            if reinserted.len() <= lvl {
                reinserted.resize(lvl + 1, false);
            }
            if i != 0 && !reinserted[lvl] {
                reinserted[lvl] = true;
                let removed = self.take_farthest(n);
                for k in (0..i).rev() {
                    self.refresh_entry(path[k], path[k + 1]);
                }
                self.stats.forced_reinserts += 1;
                self.stats.reinserted_entries += removed.len() as u64;
                for (rect, r) in removed {
                    self.insert_entry(&rect, r, node_level, reinserted);
                }
                return;
            }
            sibling = Some(self.split(n));
            self.stats.splits += 1;
        }
        if let Some(s) = sibling {
            let old = self.root;
            let mut root = Node::new(self.nodes[old as usize].level + 1);
            root.push(&self.node_mbr(old), old);
            root.push(&self.node_mbr(s), s);
            self.nodes.push(root);
            self.root = (self.nodes.len() - 1) as u32;
        }
    }

    /// Recomputes the rectangle that `parent` stores for `child`.
    fn refresh_entry(&mut self, parent: u32, child: u32) {
        let rect = self.node_mbr(child);
        let m2 = self.m2();
        let p = &mut self.nodes[parent as usize];
        let k = p
            .refs
            .iter()
            .position(|&c| c == child)
            .expect("child listed in parent");
        p.rects[k * m2..(k + 1) * m2].copy_from_slice(&rect);
    }

    fn choose_subtree(&self, n: u32, rect: &[f32]) -> usize {
        let node = &self.nodes[n as usize];
        let m2 = self.m2();
        let count = node.len();
        let enlarge: Vec<(f64, f64)> = (0..count)
            .map(|k| {
                let e = node.rect(k, m2);
                let a = mbr::area(e);
                (mbr::union_area(e, rect) - a, a)
            })
            .collect();

        if node.level != 1 {
            return (0..count)
                .min_by(|&a, &b| enlarge[a].partial_cmp(&enlarge[b]).unwrap())
                .unwrap();
        }

        // Children are leaves: minimise overlap enlargement over the entries
        // with the least area enlargement.
        let mut order: Vec<usize> = (0..count).collect();
        order.sort_by(|&a, &b| enlarge[a].partial_cmp(&enlarge[b]).unwrap());
        // A containing entry adds no overlap and sorts first; nothing beats it.
        if enlarge[order[0]].0 == 0.0 {
            return order[0];
        }
        order.truncate(self.config.overlap_candidates.max(1));
        let mut grown = vec![0f32; m2];
        let mut best = order[0];
        let mut best_key = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        for &k in &order {
            let e = node.rect(k, m2);
            mbr::union_of(e, rect, &mut grown);
            let mut delta = 0.0;
            for j in 0..count {
                if j != k {
                    let other = node.rect(j, m2);
                    delta += mbr::overlap(&grown, other) - mbr::overlap(e, other);
                    if delta > best_key.0 {
                        break;
                    }
                }
            }
            let key = (delta, enlarge[k].0, enlarge[k].1);
            if key < best_key {
                best_key = key;
                best = k;
            }
        }
        best
    }

    /// Removes the reinsert fraction of entries farthest from the node's
    /// center; returns them nearest first.
    fn take_farthest(&mut self, n: u32) -> Vec<(Vec<f32>, u32)> {
        let m = self.dims;
        let m2 = self.m2();
        let bbox = self.node_mbr(n);
        let center: Vec<f64> = (0..m)
            .map(|j| (bbox[j] as f64 + bbox[m + j] as f64) * 0.5)
            .collect();
        let node = &mut self.nodes[n as usize];
        let count = node.len();
        let p = self.config.reinsert_count(count).min(count - 1);
        let mut order: Vec<(f64, usize)> = (0..count)
            .map(|k| (mbr::center_dist2(node.rect(k, m2), &center), k))
            .collect();
        order.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut remove = vec![false; count];
        let mut removed: Vec<(Vec<f32>, u32)> = order[..p]
            .iter()
            .map(|&(_, k)| {
                remove[k] = true;
                (node.rect(k, m2).to_vec(), node.refs[k])
            })
            .collect();
        removed.reverse();

        let mut refs = Vec::with_capacity(count);
        let mut rects = Vec::with_capacity(node.rects.len());
        for (k, &gone) in remove.iter().enumerate() {
            if !gone {
                refs.push(node.refs[k]);
                rects.extend_from_slice(node.rect(k, m2));
            }
        }
        node.refs = refs;
        node.rects = rects;
        removed
    }

    /// Moves the second group of the chosen split into a new node.
    fn split(&mut self, n: u32) -> u32 {
        let m2 = self.m2();
        let level = self.nodes[n as usize].level;
        let min = self.config.min_entries(level);
        let (keep, moved) = split::choose_split(&self.nodes[n as usize], self.dims, min);
        let node = &self.nodes[n as usize];
        let mut a = Node::new(level);
        let mut b = Node::new(level);
        for &k in &keep {
            a.push(node.rect(k, m2), node.refs[k]);
        }
        for &k in &moved {
            b.push(node.rect(k, m2), node.refs[k]);
        }
        self.nodes[n as usize] = a;
        self.nodes.push(b);
        (self.nodes.len() - 1) as u32
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
        self.collect(query, &mut out, stats);
        Ok(ResultSet::from_unsorted(out))
    }

    fn collect(&self, query: &RangeQuery, out: &mut Vec<ObjectId>, stats: &mut CounterSnapshot) {
        if self.is_empty() {
            return;
        }
        let m = self.dims;
        let m2 = self.m2();
        let (lower, upper) = (query.lower(), query.upper());
        let root = &self.nodes[self.root as usize];
        if !mbr::intersects_flat(
            &self.node_mbr(self.root),
            lower,
            upper,
            self.config.mbr_lanes,
        ) {
            stats.nodes_visited += 1;
            if root.level == 0 {
                stats.leaves_visited += 1;
            }
            return;
        }
        let kernel = self.config.kernel;
        let lanes = self.config.mbr_lanes;
        let mut local = CounterSnapshot::default();
        let mut stack = Vec::with_capacity(32);
        stack.push(self.root);
        while let Some(n) = stack.pop() {
            local.nodes_visited += 1;
            let node = &self.nodes[n as usize];
            if node.level == 0 {
                local.leaves_visited += 1;
                local.objects_compared += node.len() as u64;
                for (k, &id) in node.refs.iter().enumerate() {
                    let point = &node.rects[k * m2..k * m2 + m];
                    if kernel.matches_bounds(point, lower, upper) {
                        out.push(id);
                    } else {
                        local.early_breaks += 1;
                    }
                }
            } else {
                for (k, &child) in node.refs.iter().enumerate() {
                    if mbr::intersects_flat(node.rect(k, m2), lower, upper, lanes) {
                        stack.push(child);
                    }
                }
            }
        }
        stats.nodes_visited += local.nodes_visited;
        stats.leaves_visited += local.leaves_visited;
        stats.objects_compared += local.objects_compared;
        stats.early_breaks += local.early_breaks;
    }
}

impl AccessMethod for RStarTree {
    fn dims(&self) -> usize {
        self.dims
    }

    fn len(&self) -> usize {
        self.len
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
pub struct RStarBuilder {
    pub config: RStarConfig,
    pub seed: u64,
}

impl MethodBuilder for RStarBuilder {
    type Method = RStarTree;
    fn build(&self, partition: Partition) -> RStarTree {
        let salt = partition.ids.first().copied().unwrap_or(0) as u64;
        RStarTree::build(
            partition,
            self.config,
            self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        )
        .expect("configuration validated before partitioned build")
    }
}
