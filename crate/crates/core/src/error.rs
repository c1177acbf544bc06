use std::path::PathBuf;

use thiserror::Error;

use crate::descriptors::DescriptorKind;
use crate::raster::ColorSpace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot decode image: {0}")]
    Decode(String),

    #[error("unsupported conversion from {from:?} to {to:?}")]
    UnsupportedConversion { from: ColorSpace, to: ColorSpace },

    #[error("grid {rows}x{cols} is finer than image {height}x{width}")]
    GridTooFine {
        rows: usize,
        cols: usize,
        height: usize,
        width: usize,
    },

    #[error("image {width}x{height} is too small: {reason}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        reason: &'static str,
    },

    #[error("vector length {0} is not a power of two")]
    LengthNotPowerOfTwo(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("class {0} has no samples")]
    EmptyClass(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("child counts do not sum to the parent counts")]
    PartitionMismatch,

    #[error("split information is zero")]
    ZeroSplitInfo,

    #[error("corpus has {0} class(es); at least 2 are required")]
    TooFewClasses(usize),

    #[error("corpus at {0} contains no images")]
    EmptyCorpus(PathBuf),

    #[error("requested {requested} training samples for class {class} which has only {available}")]
    SplitTooLarge {
        class: String,
        requested: usize,
        available: usize,
    },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error("expected a {expected:?} table, got {got:?}")]
    KindMismatch {
        expected: DescriptorKind,
        got: DescriptorKind,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit status for the CLI: 1 input/corpus error, 2 I/O error,
    /// 3 degenerate training data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::EmptyClass(_) | Error::DegenerateInput(_) | Error::EmptyDataset => 3,
            _ => 1,
        }
    }
}
