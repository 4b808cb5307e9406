use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate mapping: {0}")]
    DegenerateMapping(String),

    #[error("singular stoichiometry {value} for {electrode} electrode (must lie strictly inside (0, 1))")]
    SingularStoichiometry { electrode: &'static str, value: f64 },

    #[error("query {query} outside sampled range [{lo}, {hi}]")]
    Extrapolation { query: f64, lo: f64, hi: f64 },

    #[error("inconsistent dataset: {0}")]
    DatasetInconsistency(String),

    #[error("transfer function evaluated at its pole s = 0")]
    Pole,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("R0 regression failed: {reason} (best R^2 = {best_r2})")]
    RegressionFailure { reason: String, best_r2: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("optimiser did not converge: {0}")]
    NonConvergence(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("non-finite state at t = {t} s")]
    NonFinite { t: f64 },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("refusing to overwrite {0} (pass --force)")]
    Overwrite(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence(_) => 3,
            Error::Io { .. } => 4,
            _ => 2,
        }
    }
}
