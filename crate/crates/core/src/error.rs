use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SnnError>;

#[derive(Debug, Error)]
pub enum SnnError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {context} at index {index}")]
    NonFinite { context: &'static str, index: usize },

    #[error(
        "integration unstable: layer {layer}, neuron {neuron}, t = {t}; \
         retry with a smaller time step (dt = {dt})"
    )]
    Unstable {
        layer: usize,
        neuron: usize,
        t: f64,
        dt: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{path}: bad magic number {found:#010x} (expected {expected:#010x})")]
    BadMagic {
        path: PathBuf,
        expected: u32,
        found: u32,
    },

    #[error("{path}: truncated file, expected {expected} bytes but found {found}")]
    Truncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("image/label count mismatch: {images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("degenerate training set: {0}")]
    DegenerateTraining(String),

    #[error("class {0} has no samples")]
    ClassAbsent(usize),

    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SnnError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SnnError::InvalidParameter(msg.into())
    }
}

pub(crate) fn ensure_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(SnnError::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

pub(crate) fn ensure_finite(context: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(index) => Err(SnnError::NonFinite { context, index }),
    }
}
