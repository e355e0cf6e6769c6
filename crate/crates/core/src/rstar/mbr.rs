//! Minimum bounding rectangles.
//!
//! Inside the tree a rectangle is a flat slice of `2m` values: the `m` low
//! coordinates followed by the `m` high coordinates. Geometric measures are
//! accumulated in `f64`.

use crate::kernel::{lanes_within, LANES};
use crate::query::RangeQuery;

/// An owned axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct Mbr {
    pub low: Vec<f32>,
    pub high: Vec<f32>,
}

impl Mbr {
    /// Panics if `low[j] > high[j]` for some `j`.
    pub fn new(low: Vec<f32>, high: Vec<f32>) -> Self {
        assert_eq!(low.len(), high.len(), "low/high length mismatch");
        assert!(low.iter().zip(&high).all(|(l, h)| l <= h), "low > high");
        Self { low, high }
    }

    /// Degenerate box at a point.
    pub fn point(p: &[f32]) -> Self {
        Self {
            low: p.to_vec(),
            high: p.to_vec(),
        }
    }

    pub(crate) fn from_flat(rect: &[f32]) -> Self {
        let m = rect.len() / 2;
        Self {
            low: rect[..m].to_vec(),
            high: rect[m..].to_vec(),
        }
    }

    pub fn dims(&self) -> usize {
        self.low.len()
    }

    pub fn contains(&self, other: &Mbr) -> bool {
        self.low.iter().zip(&other.low).all(|(a, b)| a <= b)
            && self.high.iter().zip(&other.high).all(|(a, b)| a >= b)
    }

    pub fn area(&self) -> f64 {
        self.low
            .iter()
            .zip(&self.high)
            .map(|(&l, &h)| h as f64 - l as f64)
            .product()
    }
}

/// `true` iff `query.lower[j] <= mbr.high[j]` and `query.upper[j] >= mbr.low[j]`
/// for every `j`; touching boundaries intersect.
pub fn mbr_intersects(mbr: &Mbr, query: &RangeQuery) -> bool {
    debug_assert_eq!(mbr.dims(), query.dims());
    lanes_within::<LANES>(query.lower(), query.upper(), &mbr.high, &mbr.low)
}

/// Block width used for the MBR intersection test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MbrLanes {
    /// Eight 32-bit values per block.
    #[default]
    Eight,
    /// Four values per block, emulating 256-bit registers holding 64-bit values.
    Four,
}

#[inline]
pub(crate) fn intersects_flat(rect: &[f32], lower: &[f32], upper: &[f32], lanes: MbrLanes) -> bool {
    let m = lower.len();
    let (low, high) = rect.split_at(m);
    match lanes {
        MbrLanes::Eight => lanes_within::<8>(lower, upper, high, low),
        MbrLanes::Four => lanes_within::<4>(lower, upper, high, low),
    }
}

#[inline]
pub(crate) fn area(rect: &[f32]) -> f64 {
    let m = rect.len() / 2;
    let mut a = 1.0f64;
    for j in 0..m {
        a *= rect[m + j] as f64 - rect[j] as f64;
    }
    a
}

#[inline]
pub(crate) fn margin(rect: &[f32]) -> f64 {
    let m = rect.len() / 2;
    (0..m).map(|j| rect[m + j] as f64 - rect[j] as f64).sum()
}

/// Area of the union box of `a` and `b`.
#[inline]
pub(crate) fn union_area(a: &[f32], b: &[f32]) -> f64 {
    let m = a.len() / 2;
    let mut v = 1.0f64;
    for j in 0..m {
        let lo = a[j].min(b[j]);
        let hi = a[m + j].max(b[m + j]);
        v *= hi as f64 - lo as f64;
    }
    v
}

/// Volume of the intersection of `a` and `b`; 0 when disjoint.
#[inline]
pub(crate) fn overlap(a: &[f32], b: &[f32]) -> f64 {
    let m = a.len() / 2;
    let mut v = 1.0f64;
    for j in 0..m {
        let lo = a[j].max(b[j]);
        let hi = a[m + j].min(b[m + j]);
        if hi < lo {
            return 0.0;
        }
        v *= hi as f64 - lo as f64;
    }
    v
}

#[inline]
pub(crate) fn expand(acc: &mut [f32], rect: &[f32]) {
    let m = acc.len() / 2;
    for j in 0..m {
        acc[j] = acc[j].min(rect[j]);
        acc[m + j] = acc[m + j].max(rect[m + j]);
    }
}

/// The "empty" box that any [`expand`] replaces.
pub(crate) fn empty_rect(m: usize) -> Vec<f32> {
    let mut r = vec![f32::INFINITY; 2 * m];
    r[m..].fill(f32::NEG_INFINITY);
    r
}

pub(crate) fn union_of(a: &[f32], b: &[f32], out: &mut [f32]) {
    out.copy_from_slice(a);
    expand(out, b);
}

#[inline]
pub(crate) fn center_dist2(a: &[f32], center: &[f64]) -> f64 {
    let m = a.len() / 2;
    (0..m)
        .map(|j| {
            let c = (a[j] as f64 + a[m + j] as f64) * 0.5;
            (c - center[j]) * (c - center[j])
        })
        .sum()
}
