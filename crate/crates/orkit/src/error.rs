use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum OrkitError {
    #[error("dimension overflow: lcm({0}, {1}) exceeds the machine integer range")]
    DimensionOverflow(usize, usize),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("custom bridge table has no entry for ({0}, {1})")]
    MissingBridge(usize, usize),

    #[error("invalid bridge matrix for ({n}, {p}): {reason}")]
    InvalidBridge { n: usize, p: usize, reason: String },

    #[error("invalid weight rule: {0}")]
    InvalidWeight(String),

    #[error("series diverges: DK-norm {norm} >= 1 for {func}")]
    SeriesDivergent { func: String, norm: f64 },

    #[error("series did not converge within {0} terms")]
    SeriesNotConverged(usize),

    #[error("iteration bound exceeded after {0} steps")]
    BoundExceeded(usize),

    #[error("degree bound {0} exceeded")]
    DegreeOverflow(usize),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("polynomial parse error: {0}")]
    PolyParse(String),

    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, OrkitError>;
