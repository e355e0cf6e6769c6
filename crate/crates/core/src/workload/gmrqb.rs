//! 19-column genomic variation stand-in and CSV ingestion.

use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::DataSet;
use crate::error::{Error, Result};

pub const GMRQB_DIMS: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

/// Column names and kinds of the stand-in dataset, in storage order.
pub const GMRQB_COLUMNS: [(&str, ColumnKind); GMRQB_DIMS] = [
    ("chromosome", ColumnKind::Numeric),
    ("location", ColumnKind::Numeric),
    ("quality", ColumnKind::Numeric),
    ("depth", ColumnKind::Numeric),
    ("reference_genome", ColumnKind::Categorical),
    ("variation_id", ColumnKind::Categorical),
    ("allele_freq", ColumnKind::Numeric),
    ("allele_count", ColumnKind::Numeric),
    ("ref_base", ColumnKind::Categorical),
    ("alt_base", ColumnKind::Categorical),
    ("ancestral_allele", ColumnKind::Categorical),
    ("variant_type", ColumnKind::Categorical),
    ("sample_id", ColumnKind::Categorical),
    ("gender", ColumnKind::Categorical),
    ("family_id", ColumnKind::Categorical),
    ("population", ColumnKind::Categorical),
    ("relationship", ColumnKind::Categorical),
    ("genotype", ColumnKind::Categorical),
    ("filter", ColumnKind::Categorical),
];

/// Per-column kinds of a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub columns: Vec<ColumnKind>,
}

impl CsvSchema {
    pub fn numeric(m: usize) -> Self {
        Self {
            columns: vec![ColumnKind::Numeric; m],
        }
    }

    pub fn gmrqb() -> Self {
        Self {
            columns: GMRQB_COLUMNS.iter().map(|c| c.1).collect(),
        }
    }

    /// Parses a compact spec such as `"n,n,c"` (`n`umeric, `c`ategorical).
    pub fn parse(spec: &str) -> Result<Self> {
        let columns = spec
            .split(',')
            .map(|s| match s.trim() {
                "n" | "num" | "numeric" => Ok(ColumnKind::Numeric),
                "c" | "cat" | "categorical" => Ok(ColumnKind::Categorical),
                other => Err(Error::Config(format!("unknown column kind {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { columns })
    }

    pub fn dims(&self) -> usize {
        self.columns.len()
    }
}

/// FNV-1a 64-bit hash XOR-folded to 24 bits, so every output is an exact
/// `f32` integer.
pub fn categorical_hash(value: &str) -> f32 {
    let mut h = FnvHasher::default();
    h.write(value.as_bytes());
    let h = h.finish();
    ((h ^ (h >> 24) ^ (h >> 48)) & 0xFF_FFFF) as f32
}

/// One stand-in cell before encoding.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f32),
    Cat(String),
}

impl Field {
    fn encode(&self) -> f32 {
        match self {
            Field::Num(v) => *v,
            Field::Cat(s) => categorical_hash(s),
        }
    }
}

const BASES: [&str; 4] = ["A", "C", "G", "T"];
const POPULATIONS: [&str; 26] = [
    "ACB", "ASW", "BEB", "CDX", "CEU", "CHB", "CHS", "CLM", "ESN", "FIN", "GBR", "GIH", "GWD",
    "IBS", "ITU", "JPT", "KHV", "LWK", "MSL", "MXL", "PEL", "PJL", "PUR", "STU", "TSI", "YRI",
];
const SAMPLES: u32 = 2504;

/// Deterministic stand-in rows. Individual attributes (gender, family,
/// population, relationship) are functions of the sample.
pub fn gmrqb_records(n: usize, seed: u64) -> impl Iterator<Item = [Field; GMRQB_DIMS]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(move |_| {
        let sample = rng.gen_range(0..SAMPLES);
        let ref_base = rng.gen_range(0..4);
        let alt_base = (ref_base + rng.gen_range(1..4)) % 4;
        let ancestral = if rng.gen_bool(0.9) {
            BASES[ref_base]
        } else {
            "N"
        };
        let variant = match rng.gen_range(0..100) {
            0..=84 => "SNP",
            85..=96 => "INDEL",
            97..=98 => "MNP",
            _ => "SV",
        };
        let freq: f32 = rng.gen::<f32>().powi(3);
        let genotype = ["0|1", "1|0", "1|1", "0|0"][match rng.gen_range(0..10) {
            0..=3 => 0,
            4..=7 => 1,
            8 => 2,
            _ => 3,
        }];
        [
            Field::Num(rng.gen_range(1..=23) as f32),
            Field::Num(rng.gen_range(1..=250_000_000) as f32),
            Field::Num((rng.gen::<f32>().powi(2) * 1000.0).round() / 10.0),
            Field::Num(rng.gen_range(1..=1000) as f32 * rng.gen_range(1..=5) as f32),
            Field::Cat(["GRCh37", "GRCh38", "hg19"][rng.gen_range(0..3)].into()),
            Field::Cat(format!("rs{}", rng.gen_range(1..150_000_000u32))),
            Field::Num(freq),
            Field::Num((freq * 5008.0).round()),
            Field::Cat(BASES[ref_base].into()),
            Field::Cat(BASES[alt_base].into()),
            Field::Cat(ancestral.into()),
            Field::Cat(variant.into()),
            Field::Cat(format!("HG{sample:05}")),
            Field::Cat(["male", "female"][(sample % 2) as usize].into()),
            Field::Cat(format!("F{}", sample / 2)),
            Field::Cat(POPULATIONS[(sample % 26) as usize].into()),
            Field::Cat(
                ["unrel", "mother", "father", "child", "sibling"][(sample % 5) as usize].into(),
            ),
            Field::Cat(genotype.into()),
            Field::Cat(["PASS", "PASS", "PASS", "LowQual", "q10"][rng.gen_range(0..5)].into()),
        ]
    })
}

/// The stand-in with categorical columns hashed as `load_csv` would.
pub fn gen_gmrqb(n: usize, seed: u64) -> Result<DataSet> {
    let mut values = Vec::with_capacity(n * GMRQB_DIMS);
    for rec in gmrqb_records(n, seed) {
        values.extend(rec.iter().map(Field::encode));
    }
    DataSet::new(GMRQB_DIMS, values)
}

pub fn write_gmrqb_csv(path: &Path, n: usize, seed: u64) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        row: 0,
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(GMRQB_COLUMNS.iter().map(|c| c.0))
        .map_err(csv_err)?;
    for rec in gmrqb_records(n, seed) {
        w.write_record(rec.iter().map(|f| match f {
            Field::Num(v) => v.to_string(),
            Field::Cat(s) => s.clone(),
        }))
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a headed CSV file; categorical columns go through
/// [`categorical_hash`].
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<DataSet> {
    let m = schema.dims();
    if m == 0 {
        return Err(Error::ZeroDimensions);
    }
    let err = |row: usize, message: String| Error::Csv {
        path: path.to_path_buf(),
        row,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| err(0, e.to_string()))?;
    let mut values = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut row = 0;
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(err(row + 1, e.to_string())),
        }
        row += 1;
        if record.len() != m {
            return Err(err(
                row,
                format!("expected {m} fields, found {}", record.len()),
            ));
        }
        for (j, (field, kind)) in record.iter().zip(&schema.columns).enumerate() {
            let v = match kind {
                ColumnKind::Categorical => categorical_hash(field),
                ColumnKind::Numeric => field
                    .trim()
                    .parse::<f32>()
                    .map_err(|e| err(row, format!("column {j}: {field:?}: {e}")))?,
            };
            values.push(v);
        }
    }
    DataSet::new(m, values)
}
