use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numerical parameter is outside its admissible domain.
    #[error("parameter `{name}` out of domain: {value} ({reason})")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A configuration document failed validation. `field` is the dotted
    /// path of the offending field.
    #[error("invalid configuration at `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// The trajectory would require a negative speed inside the horizon.
    #[error("negative speed {speed_m_per_s} m/s at t = {time_s} s")]
    NegativeSpeed { time_s: f64, speed_m_per_s: f64 },

    /// A path landed in a delay bin beyond the grid.
    #[error("delay overflow in {engine} engine at time step {step}: bin {bin} >= {limit}")]
    DelayOverflow {
        engine: &'static str,
        step: usize,
        bin: usize,
        limit: usize,
    },

    /// A true MU position fell outside the constant-velocity backbone.
    #[error(
        "output step {step} at backbone coordinate {position} exceeds backbone span {span}; increase the backbone length"
    )]
    HorizonExceeded {
        step: usize,
        position: f64,
        span: f64,
    },

    /// Inputs with incompatible shapes were combined.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The ensemble has zero power at the ACF anchor.
    #[error("zero ensemble power at anchor t = {anchor_s} s")]
    DegenerateAnchor { anchor_s: f64 },

    /// A statistics request does not fit the available data.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Files listed in a manifest are missing on disk.
    #[error("missing artifacts: {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    MissingArtifacts(Vec<PathBuf>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
