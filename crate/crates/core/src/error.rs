use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("point is infeasible for the regularizer (h = +inf)")]
    Infeasible,

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("norm-ball guard: unconstrained minimizer has norm {norm} > radius {radius}")]
    BallGuard { norm: f64, radius: f64 },

    #[error("Frank-Wolfe gap {0:e} is negative beyond round-off")]
    NegativeGap(f64),

    #[error("line search exceeded {cap} trials at iteration {k}")]
    LineSearchCap { k: usize, cap: u32 },

    #[error("{algorithm} failed: {message}")]
    Solver { algorithm: String, message: String },

    #[error("configuration invalid:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot load {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that stem from a bad configuration rather than a
    /// failure while computing.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Config { .. })
    }
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub(crate) fn check_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
