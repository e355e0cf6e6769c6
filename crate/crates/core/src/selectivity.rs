//! The naive selectivity oracle.

use crate::data::DataSet;
use crate::error::Result;
use crate::kernel::MatchKernel;
use crate::query::RangeQuery;

/// Joint and per-dimension fractions of a dataset matching a query.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectivityStats {
    pub joint: f64,
    pub per_dim: Vec<f64>,
}

impl SelectivityStats {
    /// Product of per-dimension selectivities, i.e. the joint selectivity
    /// expected when dimensions are statistically independent.
    pub fn independent_estimate(&self) -> f64 {
        self.per_dim.iter().product()
    }
}

/// Counts matches by brute force. For an empty dataset all fractions are 0,
/// except unqueried dimensions which are 1 by definition.
pub fn selectivity(data: &DataSet, query: &RangeQuery) -> Result<SelectivityStats> {
    query.check_dims(data.dims())?;
    let m = data.dims();
    let n = data.len();
    let mut joint = 0usize;
    let mut per_dim = vec![0usize; m];
    let (lower, upper) = (query.lower(), query.upper());
    for row in data.rows() {
        let mut all = true;
        for j in 0..m {
            if lower[j] <= row[j] && row[j] <= upper[j] {
                per_dim[j] += 1;
            } else {
                all = false;
            }
        }
        joint += all as usize;
    }
    let frac = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    Ok(SelectivityStats {
        joint: frac(joint),
        per_dim: per_dim
            .iter()
            .enumerate()
            .map(|(j, &c)| if query.is_queried(j) { frac(c) } else { 1.0 })
            .collect(),
    })
}

/// Joint selectivity only; cheaper than [`selectivity`] thanks to early exit.
pub fn joint_selectivity(data: &DataSet, query: &RangeQuery) -> Result<f64> {
    query.check_dims(data.dims())?;
    if data.is_empty() {
        return Ok(0.0);
    }
    let hits = data
        .rows()
        .filter(|row| MatchKernel::SCALAR.matches(row, query))
        .count();
    Ok(hits as f64 / data.len() as f64)
}
