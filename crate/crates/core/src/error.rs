use thiserror::Error;

/// Errors raised while building the atom-cavity model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coupling {ground} -> {excited} with polarization {polarization} violates the selection rule")]
    SelectionRule {
        ground: String,
        excited: String,
        polarization: String,
    },

    #[error("decay branching from `{excited}` sums to {sum}, expected 1")]
    Branching { excited: String, sum: f64 },

    #[error("level index {0} out of range")]
    LevelIndex(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}

/// Errors raised by the integrators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("step-size failure at t = {time:e} s: drift {drift:e} exceeds tolerance at minimum step")]
    StepFailure { time: f64, drift: f64 },

    #[error("time grid must be strictly increasing (index {0})")]
    TimeGrid(usize),

    #[error("invalid initial state: {0}")]
    InitialState(String),

    #[error("state norm underflow at t = {time:e} s (norm² = {norm_sq:e})")]
    NormUnderflow { time: f64, norm_sq: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}

/// Errors raised by the source-level drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SourceError {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("pulse {pulse}: {source}")]
    Pulse {
        pulse: usize,
        #[source]
        source: DynamicsError,
    },

    #[error(transparent)]
    Dynamics(#[from] DynamicsError),

    #[error("invalid program: {0}")]
    Program(String),

    #[error("envelope has no flux for {0}")]
    NoFlux(&'static str),
}

/// Errors raised by the detection and interference analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectionError {
    #[error("time grids of the correlation surfaces differ")]
    GridMismatch,

    #[error("perpendicular coincidences vanish; visibility undefined")]
    Degenerate,

    #[error("invalid detection parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(transparent)]
    Source(#[from] SourceError),

    #[error(transparent)]
    Dynamics(#[from] DynamicsError),

    #[error(transparent)]
    Model(#[from] ModelError),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Errors raised while reading or validating an experiment configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },

    #[error("malformed config: {0}")]
    Parse(String),

    #[error("unknown preset `{0}` (available: paper-defaults)")]
    Preset(String),

    #[error("invalid `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Source(#[from] SourceError),

    #[error(transparent)]
    Detection(#[from] DetectionError),
}
