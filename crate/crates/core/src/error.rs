use std::io;

/// Errors produced anywhere in the fit / compress / decode pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Tensor shapes do not line up for an operation.
    #[error("dimension error in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    /// Invalid architecture, schedule or operator configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The caller violated an API precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// The representation lacks a component needed for the request.
    #[error("capability error: {0}")]
    Capability(String),

    /// Training diverged.
    #[error("non-finite loss at epoch {epoch}, batch {batch} (lr {lr:e})")]
    NonFinite { epoch: usize, batch: usize, lr: f64 },

    /// Malformed bitstream, image, or text input.
    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported bitstream version {found} (expected {expected})")]
    Version { found: u16, expected: u16 },

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn dim(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
