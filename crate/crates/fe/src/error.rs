use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeError {
    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("{path}:{line}: {msg}")]
    MeshFile {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid case: {0}")]
    Case(String),

    /// Parse failure; the message carries line and column.
    #[error("cannot parse case file {path}: {msg}")]
    CaseParse { path: PathBuf, msg: String },

    /// A constitutive evaluation failed at an integration point.
    #[error("element {element}, point {point}: {source}")]
    Material {
        element: usize,
        point: usize,
        #[source]
        source: constikit::Error,
    },

    #[error(transparent)]
    Kernel(#[from] constikit::Error),

    #[error("singular system matrix at equation {0}")]
    Singular(usize),

    #[error("element {element}: non-positive Jacobian ({det:e}) at point {point}")]
    Jacobian {
        element: usize,
        point: usize,
        det: f64,
    },

    /// Newton failed to converge and all cutbacks were spent.
    #[error("increment ending at t = {time} failed after {cuts} cutbacks: {reason}")]
    NotConverged {
        time: f64,
        cuts: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = FeError> = std::result::Result<T, E>;
