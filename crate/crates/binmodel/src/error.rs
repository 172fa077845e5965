use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] binmodel_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, row {row}: {message}")]
    Data { path: PathBuf, row: u64, message: String },

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("oracle resolution too coarse: {bins} frequency bins across the noise band, need at least {required}")]
    Resolution { bins: usize, required: usize },

    #[error("no digitized data for {0}")]
    MissingData(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from bad input rather than from the computation.
    pub fn is_validation(&self) -> bool {
        use binmodel_core::Error as M;
        match self {
            Error::Model(e) => matches!(
                e,
                M::InvalidStimulus(_)
                    | M::InvalidParameter(_)
                    | M::UnknownFamily(_)
                    | M::SweepOutOfRange { .. }
                    | M::LengthMismatch(..)
                    | M::InsufficientData { .. }
            ),
            Error::Io { .. }
            | Error::Data { .. }
            | Error::Config { .. }
            | Error::Argument(_)
            | Error::Resolution { .. } => true,
            Error::MissingData(_) => false,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        if self.is_validation() {
            1
        } else {
            2
        }
    }
}
