//! The uniform build/search abstraction over scans and indexes.

use crate::counters::CounterSnapshot;
use crate::data::ObjectId;
use crate::parallel::Partition;
use crate::query::RangeQuery;

/// A searchable instance over one set of objects.
pub trait AccessMethod: Send + Sync {
    fn dims(&self) -> usize;

    /// Number of stored objects.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends the original ids of all matching objects to `out`, in no
    /// particular order. The query's dimensionality has already been checked.
    fn search_into(&self, query: &RangeQuery, out: &mut Vec<ObjectId>, stats: &mut CounterSnapshot);
}

/// Builds one [`AccessMethod`] instance from the objects of a partition.
pub trait MethodBuilder: Sync {
    type Method: AccessMethod;

    fn build(&self, partition: Partition) -> Self::Method;
}
