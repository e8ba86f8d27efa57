use std::path::PathBuf;

/// Errors produced by the extraction and evaluation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("invalid window {width}x{height}: both sides must be odd and nonzero")]
    InvalidWindow { width: usize, height: usize },

    #[error("invalid thresholds: low ({low}) must be below high ({high})")]
    InvalidThresholds { low: u8, high: u8 },

    #[error("annotation for `{image_id}` has no {object}")]
    MissingObject {
        image_id: String,
        object: &'static str,
    },

    #[error("degenerate {object} polygon for `{image_id}` (zero area)")]
    DegenerateAnnotation {
        image_id: String,
        object: &'static str,
    },

    #[error("invalid annotation `{image_id}`: {reason}")]
    InvalidAnnotation { image_id: String, reason: String },

    #[error("invalid detection: {0}")]
    InvalidDetection(String),

    #[error("run-length encoding covers {actual} pixels, expected {expected}")]
    RleLength { expected: usize, actual: usize },

    #[error("{0} is undefined for this input")]
    Undefined(&'static str),

    #[error("need at least 4 pairs for correlation statistics, got {0}")]
    TooFewPairs(usize),

    #[error("image ids do not align: {}", .0.join(", "))]
    UnmatchedImages(Vec<String>),

    #[error("invalid fixture spec: {0}")]
    InvalidSpec(String),

    #[error("{}: record {index}: {message}", file.display())]
    Record {
        file: PathBuf,
        index: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("png encoding: {0}")]
    PngEncode(#[from] png::EncodingError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
