use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Triangular factorization broke down at the given pivot.
    #[error("matrix is not positive definite (pivot {pivot})")]
    Singular { pivot: usize },

    /// A vector lies (numerically) in the span of an existing basis.
    #[error("degenerate direction: residual {residual:.3e} below threshold {threshold:.3e}")]
    DegenerateDirection { residual: f64, threshold: f64 },

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("group {group}: {source}")]
    Group {
        group: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{phase}: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn in_group(self, group: usize) -> Self {
        Error::Group {
            group,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_phase(self, phase: &'static str) -> Self {
        Error::Phase {
            phase,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::Config(_) | Error::Json(_) => true,
            Error::Group { source, .. } | Error::Phase { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}
