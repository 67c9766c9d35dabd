use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building scenes or evaluating the contact model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scene parse error: {0}")]
    Parse(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("non-manifold boundary: {0}")]
    NonManifold(String),
    #[error("inverted orientation: {0}")]
    InvertedOrientation(String),
    #[error("degenerate element: {0}")]
    DegenerateElement(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("rest configuration is in contact: {0}")]
    RestInContact(String),
    #[error("zero distance between primitives {0}")]
    ZeroDistance(String),
    #[error("configuration already intersecting: {0}")]
    Intersecting(String),
    #[error("line search failed after {halvings} halvings (newton iteration {iteration}, decrement {decrement:e})")]
    LineSearch {
        iteration: usize,
        halvings: usize,
        decrement: f64,
    },
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("newton did not converge in {0} iterations")]
    NoConvergence(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
