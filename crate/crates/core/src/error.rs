use thiserror::Error;

/// Errors raised by construction, wiring application and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("negative entry {value} at flat index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("setting (x={x}, y={y}) sums to 1{deviation:+e}")]
    NormalizationViolation { x: usize, y: usize, deviation: f64 },

    #[error("length mismatch: expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite entry at flat index {0}")]
    NonFinite(usize),

    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("vertex count {count} exceeds cap {cap}")]
    VertexCapExceeded { count: u128, cap: u64 },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("no convergence after {iterations} iterations (gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("index sets differ: {0} vs {1}")]
    IndexMismatch(usize, usize),

    #[error("distribution not normalized (total {0})")]
    NotNormalized(f64),

    #[error("invalid wiring: {0}")]
    InvalidWiring(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
