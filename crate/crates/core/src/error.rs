use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum YsError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsupported dimension {0}; only 2 and 3 are supported")]
    UnsupportedDimension(usize),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("effect positivity violated: {0}")]
    PositivityViolation(String),

    #[error("lurking variable out of range: {0}")]
    LurkingOutOfRange(String),

    #[error("degenerate QCYS condition: q1 = q2 = {q}, the threshold is undefined")]
    DegenerateCondition { q: f64 },

    #[error("degenerate superposition: normalization {norm:.3e} is below cutoff")]
    DegenerateSuperposition { norm: f64 },

    #[error("lambda = {0} outside [0, 1]")]
    LambdaOutOfRange(f64),

    #[error("measure {measure} is not supported for dimension {dim}")]
    UnsupportedMeasure { measure: &'static str, dim: usize },

    #[error("sampling starved: premise not met after {rejections} rejections")]
    SamplingStarvation { rejections: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty record list")]
    EmptyRecords,

    #[error("scenario file: {0}")]
    ScenarioFormat(String),
}

pub type Result<T, E = YsError> = std::result::Result<T, E>;
