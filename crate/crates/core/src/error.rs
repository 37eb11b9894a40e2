use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("genome shape mismatch: expected {expected} weights and delays, got {weights} weights and {delays} delays")]
    GenomeShape {
        expected: usize,
        weights: usize,
        delays: usize,
    },

    #[error("genome value out of domain at gene {index}: {reason}")]
    GenomeDomain { index: usize, reason: String },

    #[error("neuron index {index} out of range (network has {len} neurons)")]
    NeuronIndex { index: usize, len: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("length mismatch: {what} (expected {expected}, got {actual})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("empty population")]
    EmptyPopulation,

    #[error("refusing to resume: {0}")]
    ResumeRefused(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}
