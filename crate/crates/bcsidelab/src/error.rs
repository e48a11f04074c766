use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument, configuration, or scenario file.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A codebook or candidate-set size exceeded its configured cap.
    #[error("resource cap exceeded: {what} needs {needed} but the cap is {cap}")]
    ResourceCap {
        what: String,
        needed: u128,
        cap: u64,
    },

    /// File-system failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Process exit code used by the CLI: 2 validation, 3 resource, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::ResourceCap { .. } => 3,
            Error::Io(_) => 4,
        }
    }
}
