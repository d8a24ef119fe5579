use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("visibility {0} outside [0, 1]")]
    InvalidVisibility(f64),

    #[error("correlation undefined: all four coincidence rates are zero")]
    UndefinedCorrelation,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration invariant was violated; `key` is the dotted key path.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("failed to parse config{}: {message}", path_suffix(.path))]
    ConfigParse { path: Option<PathBuf>, message: String },

    #[error("event stream is not time-ordered at record {index}")]
    Unordered { index: usize },

    #[error("malformed detection record file: {0}")]
    Format(String),

    #[error("fringe fit failed: {0}")]
    Fit(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

fn path_suffix(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!(" {}", p.display()),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
