use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no coupling time reaches |A1|/|A2| = {requested}; smallest achievable ratio is {infimum}")]
    InfeasibleRatio { requested: f64, infimum: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e} after {subdivisions} subdivisions")]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("closed form is not proportional to the oracle (max deviation {max_deviation:e})")]
    ShapeMismatch { max_deviation: f64 },

    #[error("malformed {what}: {reason}")]
    Parse { what: &'static str, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
