use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the tensor kernels, the bridge and the material models.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke a documented precondition (array length, regime, symmetry).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A deformation gradient (or increment) with non-positive determinant.
    #[error("invalid configuration: det F = {det:e}")]
    InvalidConfiguration { det: f64 },

    #[error("singular matrix (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    /// A constitutive update failed; the host should cut the increment.
    #[error("material `{material}` failed: {reason}")]
    Material { material: String, reason: String },

    #[error("cannot load plugin {path}: {reason}")]
    PluginLoad { path: PathBuf, reason: String },

    #[error("plugin {path} does not export `{symbol}`")]
    PluginSymbol { path: PathBuf, symbol: String },

    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error("invalid plugin metadata: {0}")]
    Metadata(String),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }

    pub(crate) fn material(material: &str, reason: impl Into<String>) -> Self {
        Error::Material {
            material: material.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
