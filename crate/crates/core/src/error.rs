use thiserror::Error;

/// Errors raised by the metric, design and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate constellation: need at least 2 points, got {0}")]
    DegenerateConstellation(usize),

    #[error("beamformer is not unit norm (norm = {0})")]
    NonUnitBeamformer(f64),

    #[error("weight {name} = {value} outside [0, 1]")]
    WeightOutOfRange { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid constellation order {0}: {1}")]
    InvalidOrder(usize, &'static str),

    #[error("zero matrix or vector: {0}")]
    ZeroInput(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("CFAR window ({window} cells) exceeds grid dimension ({grid} cells)")]
    CfarWindow { window: usize, grid: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_weight(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::WeightOutOfRange { name, value })
    }
}
