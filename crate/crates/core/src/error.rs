use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimensionality must be at least 1")]
    ZeroDimensions,

    #[error("value buffer of length {len} is not a multiple of dimensionality {dims}")]
    RaggedValues { len: usize, dims: usize },

    #[error("non-finite value at object {row}, dimension {dim}")]
    NonFinite { row: usize, dim: usize },

    #[error("invalid predicate on dimension {dim}: lower {lower} > upper {upper}")]
    InvertedPredicate { dim: usize, lower: f32, upper: f32 },

    #[error("NaN bound in predicate on dimension {dim}")]
    NanBound { dim: usize },

    #[error("partition count must be at least 1")]
    ZeroPartitions,

    #[error("thread count must be at least 1")]
    ZeroThreads,

    #[error("layout covers {layout} objects but dataset has {data}")]
    LayoutMismatch { layout: usize, data: usize },

    #[error("need at least {needed} objects, dataset has {found}")]
    NotEnoughObjects { needed: usize, found: usize },

    #[error("dataset format: {0}")]
    Format(String),

    #[error("csv {path}: row {row}: {message}")]
    Csv {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("template config line {line}: {message}")]
    TemplateConfig { line: usize, message: String },

    #[error("template {template} references dimension {dim} but data has {dims} dimensions")]
    TemplateDimension {
        template: u8,
        dim: usize,
        dims: usize,
    },

    #[error("query batch line {line}: {message}")]
    QueryBatch { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Path {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn at_path(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Error {
        let path = path.into();
        move |source| Error::Path { path, source }
    }
}
