use std::path::PathBuf;

use thiserror::Error;

use crate::solver::SolveReport;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two meshes were expected to share an initial mesh but do not, or a mesh
    /// was expected to refine another one.
    #[error("structural error: {0}")]
    Structure(String),

    #[error("degenerate element {element} (signed area {area:e})")]
    DegenerateElement { element: usize, area: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error(
        "PCG did not converge after {} iterations (relative residual {:e})",
        .0.iterations,
        .0.relative_residual
    )]
    NonConvergence(SolveReport),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
