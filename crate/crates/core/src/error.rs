use std::path::PathBuf;

/// Errors raised by the laboratory's solvers, verifiers and artifact I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at index {index} in {what}")]
    NonFinite {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    TimeStep { dt: f64, bound: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("topology change: {0}")]
    Topology(String),

    #[error("incompatible Stokes boundary data: net flux {flux:e}")]
    IncompatibleFlux { flux: f64 },

    #[error("solver diverged at t = {t}: {reason}")]
    Diverged { t: f64, reason: String },

    #[error("configuration error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("time misalignment: {0}")]
    Misaligned(String),

    #[error("empty series: {0}")]
    EmptySeries(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
