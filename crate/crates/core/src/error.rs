use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cutoff {cutoff} leaves truncation tail {tail:.3e} (limit {limit:.0e})")]
    TailTooLarge { cutoff: usize, tail: f64, limit: f64 },

    #[error("squeezing parameter |t| = {0} must be < 1")]
    InvalidSqueezing(f64),

    #[error("state is not normalized: norm^2 = {0}")]
    NotNormalized(f64),

    #[error("ensemble weights must be non-negative and sum to 1 (got {0})")]
    InvalidWeights(f64),

    #[error("invalid mode index {index} for a {num_modes}-mode system")]
    ModeOutOfRange { index: usize, num_modes: usize },

    #[error("beam splitter needs two distinct modes, got ({0}, {0})")]
    DegenerateBeamSplitter(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("photon total {total} exceeds limit {limit}")]
    PhotonLimit { total: usize, limit: usize },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("efficiency {eta} is at or below the inversion threshold {min}")]
    UnstableInversion { eta: f64, min: f64 },

    #[error("efficiency {0} outside [0, 1]")]
    InvalidEfficiency(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
