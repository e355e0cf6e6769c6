//! The dataset: `n` objects of `m` 32-bit values each, stored row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Identifier of a data object: its 0-based row position in the source dataset.
pub type ObjectId = u32;

/// Observed value range of one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimBounds {
    pub min: f32,
    pub max: f32,
}

impl DimBounds {
    pub fn width(&self) -> f32 {
        self.max - self.min
    }
}

/// Immutable row-major matrix of data objects.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    dims: usize,
    values: Vec<f32>,
    bounds: Vec<DimBounds>,
}

impl DataSet {
    /// Wraps a row-major value buffer. Rejects NaN and infinite values.
    pub fn new(dims: usize, values: Vec<f32>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::ZeroDimensions);
        }
        if !values.len().is_multiple_of(dims) {
            return Err(Error::RaggedValues {
                len: values.len(),
                dims,
            });
        }
        if values.len() / dims > ObjectId::MAX as usize {
            return Err(Error::Config(format!(
                "at most {} objects are addressable",
                ObjectId::MAX
            )));
        }
        let bounds = compute_bounds(dims, &values)?;
        Ok(Self {
            dims,
            values,
            bounds,
        })
    }

    /// A dataset with no objects.
    pub fn empty(dims: usize) -> Result<Self> {
        Self::new(dims, Vec::new())
    }

    pub fn from_rows<R: AsRef<[f32]>>(dims: usize, rows: &[R]) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * dims);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(dims, values)
    }

    /// Number of objects.
    pub fn len(&self) -> usize {
        self.values.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Dimensionality.
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    /// Per-dimension bounds. For an empty dataset every dimension reports `[0, 0]`.
    pub fn bounds(&self) -> &[DimBounds] {
        &self.bounds
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f32> {
        self.values.chunks_exact(self.dims)
    }

    /// Writes the little-endian binary format: `"MDRQ"`, u32 version, u64 n, u32 m, then n·m f32.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(self.dims as u32).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)
            .map_err(|_| Error::Format("truncated header".into()))?;
        if &header[0..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n = u64::from_le_bytes(header[8..16].try_into().unwrap());
        let m = u32::from_le_bytes(header[16..20].try_into().unwrap()) as usize;
        if m == 0 {
            return Err(Error::ZeroDimensions);
        }
        let expected = (n as usize)
            .checked_mul(m)
            .and_then(|c| c.checked_mul(4))
            .ok_or_else(|| Error::Format("header size overflow".into()))?;
        let mut body = Vec::with_capacity(expected);
        r.read_to_end(&mut body)?;
        if body.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} payload bytes for {n}x{m}, found {}",
                body.len()
            )));
        }
        let values = body
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Self::new(m, values)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(Error::at_path(path))?;
        self.write_binary(BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(Error::at_path(path))?;
        Self::read_binary(BufReader::new(file))
    }
}

const MAGIC: &[u8; 4] = b"MDRQ";
const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

fn compute_bounds(dims: usize, values: &[f32]) -> Result<Vec<DimBounds>> {
    if values.is_empty() {
        return Ok(vec![DimBounds { min: 0.0, max: 0.0 }; dims]);
    }
    let mut bounds = vec![
        DimBounds {
            min: f32::INFINITY,
            max: f32::NEG_INFINITY,
        };
        dims
    ];
    for (row, chunk) in values.chunks_exact(dims).enumerate() {
        for (dim, (&v, b)) in chunk.iter().zip(bounds.iter_mut()).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row, dim });
            }
            b.min = b.min.min(v);
            b.max = b.max.max(v);
        }
    }
    Ok(bounds)
}
