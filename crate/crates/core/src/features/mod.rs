//! Image loading, HOG descriptors and the cosine matching cost.

mod descriptor;
mod fvec;
mod hog;
mod pgm;

pub use descriptor::{cosine_cost, Descriptor};
pub use fvec::{read_fvec, write_fvec};
pub use hog::{compute_hog, HogParams, DEFAULT_BINS, DEFAULT_CELL_SIZE};
pub use pgm::{load_pgm, Image};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("bad PGM magic number (expected P5)")]
    BadMagic,
    #[error("invalid PGM {field}: {reason}")]
    BadHeader { field: &'static str, reason: String },
    #[error("PGM maxval {0} exceeds 255")]
    MaxvalTooLarge(u32),
    #[error("truncated PGM raster: expected {expected} bytes, found {found}")]
    TruncatedRaster { expected: usize, found: usize },
    #[error("image is {width}x{height} but must be at least one {cell}x{cell} cell")]
    ImageTooSmall { width: usize, height: usize, cell: usize },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("descriptor contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("descriptor dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("FVEC format error on line {line}: {reason}")]
    Fvec { line: usize, reason: String },
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FeatureError {
    fn from(e: std::io::Error) -> Self {
        FeatureError::Io(e.to_string())
    }
}
