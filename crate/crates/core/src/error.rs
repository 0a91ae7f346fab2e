use thiserror::Error;

use crate::admissibility::AdmissibilityReport;

pub type Result<T, E = KcboError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum KcboError {
    #[error("unknown objective `{0}` (expected one of: ackley, tanh_rastrigin, tanh_quadratic, cosine_well)")]
    UnknownObjective(String),

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("non-finite state after step {step} (t = {time})")]
    Blowup { step: u64, time: f64 },

    #[error("{excluded} of {requested} replicas blew up")]
    BlowupDominated { excluded: usize, requested: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("admissibility violated: {0}")]
    Admissibility(String),

    #[error("insufficient data: {usable} usable points (need at least 3), {dropped} nonpositive values dropped")]
    InsufficientData { usable: usize, dropped: usize },

    #[error("no admissible parameter set found within the search budget")]
    NotFound { best: Option<Box<AdmissibilityReport>> },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
