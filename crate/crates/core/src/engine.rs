//! Uniform construction and querying of every access method.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::counters::{CounterSnapshot, Counters};
use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::kdtree::{KdTree, KdTreeBuilder};
use crate::kernel::MatchKernel;
use crate::parallel::{build_partitioned, PartitionLayout, PartitionedIndex};
use crate::query::{RangeQuery, ResultSet};
use crate::rstar::{RStarBuilder, RStarConfig, RStarTree};
use crate::scan::{sequential_scan_counted, HorizontalScan, VerticalScan};
use crate::vafile::{VaFile, VaFileBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodId {
    /// Single-threaded scan over the unpartitioned dataset.
    Seq,
    HScan,
    VScan,
    KdTree,
    RStar,
    VaFile,
}

impl MethodId {
    pub const ALL: [MethodId; 6] = [
        MethodId::Seq,
        MethodId::HScan,
        MethodId::VScan,
        MethodId::KdTree,
        MethodId::RStar,
        MethodId::VaFile,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Seq => "seq",
            MethodId::HScan => "hscan",
            MethodId::VScan => "vscan",
            MethodId::KdTree => "kdtree",
            MethodId::RStar => "rstar",
            MethodId::VaFile => "vafile",
        }
    }

    pub fn is_partitioned(self) -> bool {
        !matches!(self, MethodId::Seq | MethodId::VScan)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "seq" | "sequential" | "scan" => MethodId::Seq,
            "hscan" | "horizontal" => MethodId::HScan,
            "vscan" | "vertical" => MethodId::VScan,
            "kdtree" | "kd" | "kd-tree" => MethodId::KdTree,
            "rstar" | "rtree" | "r*-tree" => MethodId::RStar,
            "vafile" | "va" | "va-file" => MethodId::VaFile,
            other => return Err(Error::Config(format!("unknown method {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub method: MethodId,
    pub threads: usize,
    /// Horizontal partitions; `None` means one per worker.
    pub partitions: Option<usize>,
    pub kernel: MatchKernel,
    pub seed: u64,
    pub rstar: RStarConfig,
}

impl EngineConfig {
    pub fn new(method: MethodId) -> Self {
        Self {
            method,
            threads: 1,
            partitions: None,
            kernel: MatchKernel::default(),
            seed: 0,
            rstar: RStarConfig::default(),
        }
    }

    pub fn threads(mut self, t: usize) -> Self {
        self.threads = t;
        self
    }

    pub fn partitions(mut self, p: usize) -> Self {
        self.partitions = Some(p);
        self
    }

    pub fn kernel(mut self, k: MatchKernel) -> Self {
        self.kernel = k;
        self.rstar.kernel = k;
        self
    }

    pub fn seed(mut self, s: u64) -> Self {
        self.seed = s;
        self
    }

    pub fn effective_partitions(&self) -> usize {
        if self.method.is_partitioned() {
            self.partitions.unwrap_or(self.threads)
        } else {
            1
        }
    }
}

enum Built {
    Seq {
        data: Arc<DataSet>,
        counters: Counters,
    },
    HScan(HorizontalScan),
    VScan(VerticalScan),
    KdTree(PartitionedIndex<KdTree>),
    RStar(PartitionedIndex<RStarTree>),
    VaFile(PartitionedIndex<VaFile>),
}

/// A built access method over one dataset.
pub struct Engine {
    config: EngineConfig,
    dims: usize,
    len: usize,
    built: Built,
}

impl Engine {
    pub fn build(data: Arc<DataSet>, config: EngineConfig) -> Result<Self> {
        let exec = if config.threads == 1 {
            Arc::new(Executor::sequential())
        } else {
            Executor::with_threads(config.threads)?
        };
        let p = config.effective_partitions();
        let layout = || PartitionLayout::new(data.len(), p, config.seed);
        let kernel = config.kernel;
        let built = match config.method {
            MethodId::Seq => Built::Seq {
                data: Arc::clone(&data),
                counters: Counters::new(),
            },
            MethodId::HScan => Built::HScan(HorizontalScan::new(&data, &layout()?, kernel, exec)?),
            MethodId::VScan => Built::VScan(VerticalScan::from_dataset(&data, exec)),
            MethodId::KdTree => Built::KdTree(build_partitioned(
                &KdTreeBuilder {
                    kernel,
                    seed: config.seed,
                },
                &data,
                &layout()?,
                exec,
            )?),
            MethodId::RStar => {
                let rconf = RStarConfig {
                    kernel,
                    ..config.rstar
                };
                rconf.validate()?;
                Built::RStar(build_partitioned(
                    &RStarBuilder {
                        config: rconf,
                        seed: config.seed,
                    },
                    &data,
                    &layout()?,
                    exec,
                )?)
            }
            MethodId::VaFile => Built::VaFile(build_partitioned(
                &VaFileBuilder { kernel },
                &data,
                &layout()?,
                exec,
            )?),
        };
        Ok(Self {
            config,
            dims: data.dims(),
            len: data.len(),
            built,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn method(&self) -> MethodId {
        self.config.method
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn search(&self, query: &RangeQuery) -> Result<ResultSet> {
        match &self.built {
            Built::Seq { data, counters } => {
                let mut stats = CounterSnapshot::default();
                let r = sequential_scan_counted(data, query, self.config.kernel, &mut stats)?;
                counters.add(&stats);
                Ok(r)
            }
            Built::HScan(s) => s.search(query),
            Built::VScan(s) => s.search(query),
            Built::KdTree(i) => i.search(query),
            Built::RStar(i) => i.search(query),
            Built::VaFile(i) => i.search(query),
        }
    }

    fn counter_ref(&self) -> &Counters {
        match &self.built {
            Built::Seq { counters, .. } => counters,
            Built::HScan(s) => s.counters(),
            Built::VScan(s) => s.counters(),
            Built::KdTree(i) => i.counters(),
            Built::RStar(i) => i.counters(),
            Built::VaFile(i) => i.counters(),
        }
    }

    pub fn counters(&self) -> CounterSnapshot {
        self.counter_ref().snapshot()
    }

    pub fn reset_counters(&self) {
        self.counter_ref().reset()
    }

    /// Total node count of the tree-based methods, `None` otherwise.
    pub fn node_count(&self) -> Option<usize> {
        match &self.built {
            Built::KdTree(i) => Some(i.instances().iter().map(KdTree::len).sum()),
            Built::RStar(i) => Some(i.instances().iter().map(RStarTree::node_count).sum()),
            Built::VaFile(i) => Some(i.instances().iter().map(|v| v.occupancy().cells).sum()),
            _ => None,
        }
    }

    pub fn kd_instances(&self) -> Option<&[KdTree]> {
        match &self.built {
            Built::KdTree(i) => Some(i.instances()),
            _ => None,
        }
    }

    pub fn rstar_instances(&self) -> Option<&[RStarTree]> {
        match &self.built {
            Built::RStar(i) => Some(i.instances()),
            _ => None,
        }
    }

    pub fn vafile_instances(&self) -> Option<&[VaFile]> {
        match &self.built {
            Built::VaFile(i) => Some(i.instances()),
            _ => None,
        }
    }
}
