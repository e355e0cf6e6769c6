//! Range queries and their results.

use crate::data::ObjectId;
use crate::error::{Error, Result};

/// Per-dimension inclusive interval predicates. Dimensions without a predicate
/// carry the sentinel pair `(-inf, +inf)`, which makes a partial-match query an
/// ordinary complete-match query.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeQuery {
    lower: Vec<f32>,
    upper: Vec<f32>,
    queried: Vec<bool>,
}

impl RangeQuery {
    pub fn new(lower: Vec<f32>, upper: Vec<f32>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::ZeroDimensions);
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (dim, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() {
                return Err(Error::NanBound { dim });
            }
            if lo > hi {
                return Err(Error::InvertedPredicate {
                    dim,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        let queried = lower
            .iter()
            .zip(&upper)
            .map(|(&lo, &hi)| !(lo == f32::NEG_INFINITY && hi == f32::INFINITY))
            .collect();
        Ok(Self {
            lower,
            upper,
            queried,
        })
    }

    /// A query with no predicate at all: matches every object.
    pub fn unbounded(dims: usize) -> Self {
        Self {
            lower: vec![f32::NEG_INFINITY; dims],
            upper: vec![f32::INFINITY; dims],
            queried: vec![false; dims],
        }
    }

    /// Builds a query from optional per-dimension `(lower, upper)` predicates.
    pub fn from_predicates<I>(predicates: I) -> Result<Self>
    where
        I: IntoIterator<Item = Option<(f32, f32)>>,
    {
        let (lower, upper) = predicates
            .into_iter()
            .map(|p| p.unwrap_or((f32::NEG_INFINITY, f32::INFINITY)))
            .unzip();
        Self::new(lower, upper)
    }

    /// Replaces the predicate on one dimension.
    pub fn with_predicate(mut self, dim: usize, lower: f32, upper: f32) -> Result<Self> {
        if dim >= self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: dim + 1,
            });
        }
        self.lower[dim] = lower;
        self.upper[dim] = upper;
        Self::new(self.lower, self.upper)
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f32] {
        &self.lower
    }

    pub fn upper(&self) -> &[f32] {
        &self.upper
    }

    pub fn is_queried(&self, dim: usize) -> bool {
        self.queried[dim]
    }

    pub fn queried(&self) -> &[bool] {
        &self.queried
    }

    /// Indices of dimensions carrying a real predicate.
    pub fn queried_dims(&self) -> impl Iterator<Item = usize> + '_ {
        self.queried
            .iter()
            .enumerate()
            .filter_map(|(j, &q)| q.then_some(j))
    }

    pub fn check_dims(&self, dims: usize) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: self.dims(),
            });
        }
        Ok(())
    }
}

/// Strictly ascending object identifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResultSet {
    ids: Vec<ObjectId>,
}

impl ResultSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sorts `ids`. Duplicates indicate a bug in the producing access method.
    pub fn from_unsorted(mut ids: Vec<ObjectId>) -> Self {
        ids.sort_unstable();
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]), "duplicate ids");
        Self { ids }
    }

    pub fn from_sorted(ids: Vec<ObjectId>) -> Self {
        debug_assert!(
            ids.windows(2).all(|w| w[0] < w[1]),
            "ids not strictly ascending"
        );
        Self { ids }
    }

    /// `{0, .., n-1}`.
    pub fn all(n: usize) -> Self {
        Self {
            ids: (0..n as ObjectId).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[ObjectId] {
        &self.ids
    }

    pub fn into_ids(self) -> Vec<ObjectId> {
        self.ids
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ObjectId> {
        self.ids.iter()
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    /// Ids present in exactly one of the two sets, as `(only_in_self, only_in_other)`.
    pub fn diff(&self, other: &ResultSet) -> (Vec<ObjectId>, Vec<ObjectId>) {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() && j < other.ids.len() {
            match self.ids[i].cmp(&other.ids[j]) {
                std::cmp::Ordering::Less => {
                    a.push(self.ids[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    b.push(other.ids[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        a.extend_from_slice(&self.ids[i..]);
        b.extend_from_slice(&other.ids[j..]);
        (a, b)
    }
}

impl<'a> IntoIterator for &'a ResultSet {
    type Item = &'a ObjectId;
    type IntoIter = std::slice::Iter<'a, ObjectId>;
    fn into_iter(self) -> Self::IntoIter {
        self.ids.iter()
    }
}
