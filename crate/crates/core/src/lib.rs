//! In-memory multidimensional range queries.
//!
//! Five access methods share one match kernel and one result contract
//! (ascending, unique object ids):
//!
//! * [`scan::sequential_scan`] and the horizontally partitioned
//!   [`scan::HorizontalScan`], both row-wise;
//! * the columnar [`scan::VerticalScan`] with bitmask intersection;
//! * [`kdtree::KdTree`], [`rstar::RStarTree`] and [`vafile::VaFile`], each
//!   built once per horizontal partition via [`parallel::build_partitioned`].
//!
//! [`workload`] generates data and queries, [`bench`] measures throughput.

pub mod bench;
pub mod counters;
pub mod data;
pub mod engine;
pub mod error;
pub mod exec;
pub mod kdtree;
pub mod kernel;
pub mod method;
pub mod parallel;
pub mod query;
pub mod rstar;
pub mod scan;
pub mod selectivity;
pub mod vafile;
pub mod workload;

pub use counters::{CounterSnapshot, Counters};
pub use data::{DataSet, DimBounds, ObjectId};
pub use engine::{Engine, EngineConfig, MethodId};
pub use error::{Error, Result};
pub use exec::{Executor, ExecutorConfig};
pub use kernel::{match_scalar, match_vectorized, KernelMode, MatchKernel};
pub use parallel::{build_partitioned, search_partitioned, PartitionLayout, PartitionedIndex};
pub use query::{RangeQuery, ResultSet};
pub use selectivity::{selectivity, SelectivityStats};
