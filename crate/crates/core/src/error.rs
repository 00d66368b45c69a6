use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A physical parameter outside its domain (e.g. a non-positive temperature).
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quasienergy gap closed at k = {k:.6} (E = {energy:.3e}); the winding number is undefined"
    )]
    GapClosed { k: f64, energy: f64 },

    #[error("winding sum {sum:.6} is not within 0.01 of an integer; increase N_k")]
    Resolution { sum: f64 },

    #[error("zero-temperature limit is ill-defined: {0}")]
    IllDefinedLimit(String),

    #[error("numerical failure in {what}: residual {residual:.3e}")]
    Numerical { what: &'static str, residual: f64 },

    #[error("configuration rejected:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
