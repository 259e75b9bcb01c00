use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the segmentation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("value {value} at pixel {index} is outside [{lo}, {hi}]")]
    OutOfRange {
        index: usize,
        value: f32,
        lo: f32,
        hi: f32,
    },

    #[error("marker exceeds ceiling at pixel {index} ({marker} > {ceiling})")]
    MarkerAboveCeiling {
        index: usize,
        marker: f32,
        ceiling: f32,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error("frame {frame}: {reason}")]
    Frame { frame: String, reason: String },

    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("unsupported raster format in {}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn frame(frame: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Frame {
            frame: frame.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
