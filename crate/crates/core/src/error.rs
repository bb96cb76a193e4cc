use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("loss must be non-negative, got {0} dB")]
    NegativeLoss(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate single-photon error fit: every decoy equation is identically zero")]
    DegenerateFit,

    #[error("link is unusable: arm transmittance is zero")]
    UnusableLink,

    #[error("graph is disconnected: no path from node {from} to node {to}")]
    Disconnected { from: usize, to: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("every ratio denominator is zero")]
    AllDegenerate,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
