use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("line {line}: expected {expected} fields, found {found}")]
    CsvArity {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: {field:?} is not a finite number")]
    CsvNumber { line: usize, field: String },

    #[error("no data rows in input")]
    EmptyInput,

    #[error("dataset must contain at least one point")]
    EmptyDataset,

    #[error("dimensionality must be at least 1")]
    ZeroDims,

    #[error("coordinate count {len} is not a multiple of dimensionality {dims}")]
    RaggedCoords { len: usize, dims: usize },

    #[error("point {id} has a non-finite coordinate")]
    NonFiniteCoord { id: usize },

    #[error("dataset has {len} points, more than the supported {max}")]
    TooManyPoints { len: usize, max: u64 },

    #[error("invalid range: lo ({lo}) must be less than hi ({hi})")]
    InvalidRange { lo: String, hi: String },

    #[error("epsilon must be positive and finite, got {eps}")]
    InvalidEpsilon { eps: String },

    #[error(
        "grid of {cells} cells in dimension {dim} overflows the 64-bit cell id space; \
         increase epsilon"
    )]
    GridCapacity { dim: usize, cells: String },

    #[error("cell coordinate {coord} out of range in dimension {dim} (grid has {cells} cells)")]
    CoordOutOfRange { dim: usize, coord: u64, cells: u64 },

    #[error("self-join supports 2 to 6 dimensions, dataset has {dims}")]
    UnsupportedDims { dims: usize },

    #[error("config epsilon ({cfg}) does not match index epsilon ({index})")]
    EpsilonMismatch { cfg: String, index: String },

    #[error("index covers {index_len} points but dataset has {dataset_len}")]
    IndexMismatch {
        index_len: usize,
        dataset_len: usize,
    },

    #[error("{field} must be at least 1")]
    ZeroConfig { field: &'static str },

    #[error("batch {batch} could not be delivered: {source}")]
    Sink { batch: usize, source: io::Error },
}
