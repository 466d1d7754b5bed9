use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid header: {source}")]
    Header {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}")]
    Format(String),

    #[error("cube payload holds {actual} values, header declares {expected}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("dimensions must be positive, got bands={bands} rows={rows} cols={cols}")]
    InvalidDimensions { bands: usize, rows: usize, cols: usize },

    #[error("ground truth is {actual_rows}x{actual_cols}, expected {rows}x{cols}")]
    DimensionMismatch { rows: usize, cols: usize, actual_rows: usize, actual_cols: usize },

    #[error("negative label {label} at row {row}, col {col}")]
    NegativeLabel { label: i64, row: usize, col: usize },

    #[error("no labeled pixels")]
    NoLabeledPixels,

    #[error("band {band} out of range for a cube with {n_bands} bands")]
    BandOutOfRange { band: usize, n_bands: usize },

    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("k = {k} out of range 1..={n_bands}")]
    KOutOfRange { k: usize, n_bands: usize },

    #[error("band subset is empty")]
    EmptySubset,

    #[error("band subset {actual:?} does not match the model's training subset {expected:?}")]
    SubsetMismatch { expected: Vec<usize>, actual: Vec<usize> },

    #[error("training set needs at least two classes, found {0}")]
    TooFewClasses(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    /// An internal invariant did not hold. Indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
