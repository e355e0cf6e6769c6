//! Structural checks and occupancy statistics.

use std::collections::HashSet;
use std::fmt;

use super::mbr::overlap;
use super::{InsertStats, RStarTree};

#[derive(Debug, Clone, PartialEq)]
pub struct RStarAudit {
    pub height: u32,
    pub nodes: usize,
    pub leaves: usize,
    pub entries: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RStarStats {
    pub nodes_per_level: Vec<usize>,
    /// Leaf fill in tenths of capacity, buckets `0..=10`.
    pub leaf_fill_histogram: [usize; 11],
    pub mean_leaf_fill: f64,
    /// Mean pairwise overlap volume between siblings, per level of the
    /// children.
    pub mean_sibling_overlap: Vec<f64>,
    pub inserts: InsertStats,
}

impl RStarTree {
    /// Verifies balance, capacity, minimum fill, exact MBRs, and that every
    /// object is stored exactly once.
    pub fn audit(&self) -> Result<RStarAudit, String> {
        let m2 = 2 * self.dims();
        let mut seen = HashSet::with_capacity(self.len());
        let mut nodes = 0;
        let mut leaves = 0;
        let mut stack = vec![(self.root, self.height())];
        while let Some((n, expect_level)) = stack.pop() {
            nodes += 1;
            let node = &self.nodes[n as usize];
            if node.level != expect_level {
                return Err(format!(
                    "node {n} at level {} expected {expect_level}",
                    node.level
                ));
            }
            if node.rects.len() != node.len() * m2 {
                return Err(format!("node {n} rect buffer length mismatch"));
            }
            let cap = self.config().capacity(node.level);
            if node.len() > cap {
                return Err(format!("node {n} holds {} > capacity {cap}", node.len()));
            }
            let is_root = n == self.root;
            let min = self.config().min_entries(node.level);
            if !is_root && node.len() < min {
                return Err(format!("node {n} holds {} < minimum {min}", node.len()));
            }
            if is_root && node.level > 0 && node.len() < 2 {
                return Err("inner root with fewer than two children".into());
            }
            if node.level == 0 {
                leaves += 1;
                for (k, &id) in node.refs.iter().enumerate() {
                    let r = node.rect(k, m2);
                    if r[..m2 / 2] != r[m2 / 2..] {
                        return Err(format!("leaf entry {id} is not a point"));
                    }
                    if !seen.insert(id) {
                        return Err(format!("object {id} stored twice"));
                    }
                }
            } else {
                for (k, &child) in node.refs.iter().enumerate() {
                    if self.nodes[child as usize].len() == 0 {
                        return Err(format!("empty child {child}"));
                    }
                    if node.rect(k, m2) != self.node_mbr(child).as_slice() {
                        return Err(format!("entry for child {child} is not its minimal MBR"));
                    }
                    stack.push((child, node.level - 1));
                }
            }
        }
        if seen.len() != self.len() {
            return Err(format!(
                "{} objects reachable, {} inserted",
                seen.len(),
                self.len()
            ));
        }
        if nodes != self.node_count() {
            return Err(format!(
                "{} nodes reachable, {} allocated",
                nodes,
                self.node_count()
            ));
        }
        Ok(RStarAudit {
            height: self.height(),
            nodes,
            leaves,
            entries: seen.len(),
        })
    }

    pub fn stats(&self) -> RStarStats {
        let m2 = 2 * self.dims();
        let levels = self.height() as usize + 1;
        let mut nodes_per_level = vec![0; levels];
        let mut hist = [0usize; 11];
        let mut fill_sum = 0.0;
        let mut leaves = 0usize;
        let mut overlap_sum = vec![0.0; levels];
        let mut overlap_pairs = vec![0usize; levels];
        for node in &self.nodes {
            nodes_per_level[node.level as usize] += 1;
            if node.level == 0 {
                let fill = node.len() as f64 / self.config().leaf_capacity as f64;
                hist[((fill * 10.0) as usize).min(10)] += 1;
                fill_sum += fill;
                leaves += 1;
            } else {
                let child_level = node.level as usize - 1;
                for a in 0..node.len() {
                    for b in a + 1..node.len() {
                        overlap_sum[child_level] += overlap(node.rect(a, m2), node.rect(b, m2));
                        overlap_pairs[child_level] += 1;
                    }
                }
            }
        }
        let mean_sibling_overlap = overlap_sum
            .iter()
            .zip(&overlap_pairs)
            .map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
            .collect();
        RStarStats {
            nodes_per_level,
            leaf_fill_histogram: hist,
            mean_leaf_fill: if leaves == 0 {
                0.0
            } else {
                fill_sum / leaves as f64
            },
            mean_sibling_overlap,
            inserts: self.insert_stats(),
        }
    }
}

impl fmt::Display for RStarStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "nodes per level (leaf first): {:?}",
            self.nodes_per_level
        )?;
        writeln!(f, "mean leaf fill: {:.3}", self.mean_leaf_fill)?;
        write!(f, "leaf fill histogram:")?;
        for (i, c) in self.leaf_fill_histogram.iter().enumerate() {
            write!(f, " {}0%:{c}", i)?;
        }
        writeln!(f)?;
        writeln!(
            f,
            "mean sibling overlap per level: {:?}",
            self.mean_sibling_overlap
        )?;
        write!(
            f,
            "forced reinserts: {} ({} entries), splits: {}",
            self.inserts.forced_reinserts, self.inserts.reinserted_entries, self.inserts.splits
        )
    }
}
