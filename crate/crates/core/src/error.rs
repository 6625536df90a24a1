use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("base station {bs}: {requested} resource blocks requested but only {available} available")]
    RbCapacity {
        bs: usize,
        requested: usize,
        available: usize,
    },

    #[error("cell index {index} out of range for a grid of {cells} cells")]
    CellOutOfRange { index: usize, cells: usize },

    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),

    #[error("frequency must be positive, got {0} Hz")]
    NonPositiveFrequency(f64),

    #[error("Rician K-factor must be nonnegative, got {0}")]
    NegativeKFactor(f64),

    #[error("unstable queue: service rate {mu} packets/s does not exceed arrival rate {lambda} packets/s")]
    UnstableQueue { lambda: f64, mu: f64 },

    #[error("UAV {0} has already reached its destination")]
    UavDone(usize),

    #[error("unknown UAV {0}")]
    UnknownUav(usize),

    #[error("all UAVs have reached their destinations; no stage left to run")]
    NoLiveAgents,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite value in TD update (reward {reward}, estimate {estimate})")]
    NonFinite { reward: f64, estimate: f64 },

    #[error("readout diverged at training iteration {iteration} with learning rate {learn_rate}")]
    Diverged { iteration: usize, learn_rate: f64 },

    #[error("missing next-stage features for a non-terminal reward")]
    MissingNextFeatures,

    #[error("enumeration too large: {actions}^{horizon} sequences exceeds {limit}")]
    EnumerationTooLarge { actions: usize, horizon: usize, limit: u64 },

    #[error("checkpoint config hash {found} does not match expected {expected}")]
    HashMismatch { expected: String, found: String },

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error("no results to export")]
    EmptyResults,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
