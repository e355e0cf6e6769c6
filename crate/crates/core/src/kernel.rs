//! Object-versus-query match kernels.
//!
//! The vectorized kernel processes dimensions in blocks of [`LANES`] values,
//! compares both boundaries per block into bit masks, ANDs the masks and exits
//! as soon as a block has a failing lane. The `m mod LANES` trailing dimensions
//! fall back to the scalar loop. The block loop is written over fixed-size
//! arrays so that LLVM lowers it to packed compares plus a movemask.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::RangeQuery;

/// Number of 32-bit values compared per block (one 256-bit register).
pub const LANES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMode {
    Scalar,
    #[default]
    #[serde(alias = "vector")]
    Vectorized,
}

impl fmt::Display for KernelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelMode::Scalar => "scalar",
            KernelMode::Vectorized => "vector",
        })
    }
}

impl FromStr for KernelMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(KernelMode::Scalar),
            "vector" | "vectorized" | "simd" => Ok(KernelMode::Vectorized),
            other => Err(Error::Config(format!("unknown kernel mode {other:?}"))),
        }
    }
}

/// The per-object match routine used by every access method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchKernel {
    pub mode: KernelMode,
}

impl MatchKernel {
    pub const SCALAR: MatchKernel = MatchKernel {
        mode: KernelMode::Scalar,
    };
    pub const VECTORIZED: MatchKernel = MatchKernel {
        mode: KernelMode::Vectorized,
    };

    pub fn new(mode: KernelMode) -> Self {
        Self { mode }
    }

    pub const fn lane_width(&self) -> usize {
        LANES
    }

    /// Hot-path match. Callers validate dimensionality once per query.
    #[inline]
    pub fn matches(&self, object: &[f32], query: &RangeQuery) -> bool {
        self.matches_bounds(object, query.lower(), query.upper())
    }

    #[inline]
    pub fn matches_bounds(&self, object: &[f32], lower: &[f32], upper: &[f32]) -> bool {
        debug_assert_eq!(object.len(), lower.len());
        match self.mode {
            KernelMode::Scalar => scalar_within(lower, upper, object),
            KernelMode::Vectorized => lanes_within::<LANES>(lower, upper, object, object),
        }
    }

    pub fn try_matches(&self, object: &[f32], query: &RangeQuery) -> Result<bool> {
        query.check_dims(object.len())?;
        Ok(self.matches(object, query))
    }
}

/// `true` iff `lower[j] <= object[j] <= upper[j]` for every dimension; stops at
/// the first failing dimension.
pub fn match_scalar(object: &[f32], query: &RangeQuery) -> Result<bool> {
    MatchKernel::SCALAR.try_matches(object, query)
}

/// Lane-blocked variant of [`match_scalar`]; same result on every input.
pub fn match_vectorized(object: &[f32], query: &RangeQuery) -> Result<bool> {
    MatchKernel::VECTORIZED.try_matches(object, query)
}

#[inline]
fn scalar_within(lower: &[f32], upper: &[f32], object: &[f32]) -> bool {
    for j in 0..object.len() {
        let v = object[j];
        if v < lower[j] || v > upper[j] {
            return false;
        }
    }
    true
}

/// Checks `lower[j] <= a[j] && upper[j] >= b[j]` for all `j` in blocks of `L`.
///
/// With `a == b == object` this is the point match; with `a = mbr.high` and
/// `b = mbr.low` it is the box intersection test.
#[inline]
pub(crate) fn lanes_within<const L: usize>(
    lower: &[f32],
    upper: &[f32],
    a: &[f32],
    b: &[f32],
) -> bool {
    let m = a.len();
    let blocks = m / L * L;
    let full: u32 = if L == 32 { u32::MAX } else { (1u32 << L) - 1 };
    let mut i = 0;
    while i < blocks {
        let lo: &[f32; L] = lower[i..i + L].try_into().unwrap();
        let hi: &[f32; L] = upper[i..i + L].try_into().unwrap();
        let va: &[f32; L] = a[i..i + L].try_into().unwrap();
        let vb: &[f32; L] = b[i..i + L].try_into().unwrap();
        let mut mask_lower = 0u32;
        let mut mask_upper = 0u32;
        for l in 0..L {
            mask_lower |= ((lo[l] <= va[l]) as u32) << l;
            mask_upper |= ((hi[l] >= vb[l]) as u32) << l;
        }
        if mask_lower & mask_upper != full {
            return false;
        }
        i += L;
    }
    for j in blocks..m {
        if a[j] < lower[j] || b[j] > upper[j] {
            return false;
        }
    }
    true
}
