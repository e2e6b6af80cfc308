//! Error type shared by every solver stage.

use thiserror::Error;

use crate::grid::Phase;

#[derive(Debug, Error)]
pub enum StefanError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("degenerate interface: {0}")]
    DegenerateInterface(String),

    #[error("map degeneracy in {phase} phase at node (i={i}, j={j}): J = {jac:.3e}")]
    MapDegeneracy {
        phase: Phase,
        i: usize,
        j: usize,
        jac: f64,
    },

    #[error("ill-conditioned modal system for mode {mode}: determinant {det:.3e}")]
    Conditioning { mode: usize, det: f64 },

    #[error("divergence (non-finite value) detected at step {step}")]
    Divergence { step: usize },

    #[error("advective CFL violated: dt = {dt:.3e} exceeds bound {bound:.3e}")]
    Cfl { dt: f64, bound: f64 },

    #[error("weight field undefined: min normal derivative {min_dnq:.3e} <= 0 in {phase} phase")]
    WeightUndefined { phase: Phase, min_dnq: f64 },

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unsupported derivative order {requested} (max {max} without surrogate)")]
    UnsupportedOrder { requested: f64, max: usize },

    #[error("{0}")]
    Oracle(String),

    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),
}

impl StefanError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        StefanError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            StefanError::Config(_) | StefanError::InvalidGeometry(_) | StefanError::UnsupportedGeometry(_) => 2,
            StefanError::Io { .. } | StefanError::Format(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, StefanError>;
