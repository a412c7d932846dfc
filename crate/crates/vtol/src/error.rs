use std::fmt;
use std::path::PathBuf;

use vtol_core::error::HarnessError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ACCEPTANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum Error {
    Io { path: PathBuf, source: std::io::Error },
    Toml { path: PathBuf, source: toml::de::Error },
    Csv { path: PathBuf, message: String },
    Config(String),
    Harness(HarnessError),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Harness(HarnessError::NumericalAbort { .. }) => EXIT_NUMERICAL,
            Error::Harness(HarnessError::SysId(vtol_core::error::SysIdError::Diverged { .. })) => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, message: impl fmt::Display) -> Self {
        Error::Csv {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, source } => write!(f, "{}: {source}", path.display()),
            Error::Toml { path, source } => write!(f, "{}: {source}", path.display()),
            Error::Csv { path, message } => write!(f, "{}: {message}", path.display()),
            Error::Config(m) => write!(f, "{m}"),
            Error::Harness(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<HarnessError> for Error {
    fn from(e: HarnessError) -> Self {
        Error::Harness(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
