use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Tensor/layer dimensions do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// A scalar argument is out of its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A precision name is not one of the supported representations.
    #[error("unknown precision '{0}' (expected one of: binary, int2, int4, int8, int16, fp32, fixed<WL>.<FL>)")]
    UnknownPrecision(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A file exists but its bytes do not match the expected layout.
    #[error("data format error: {0}")]
    DataFormat(String),

    /// A versioned container was written by an incompatible release.
    #[error("unsupported format version {found} (this build reads version {supported})")]
    VersionMismatch { found: u32, supported: u32 },

    /// Training produced a non-finite value or was otherwise unable to proceed.
    #[error("compute error: {0}")]
    Compute(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::DataFormat(msg.into())
    }
}
