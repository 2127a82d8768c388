use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("outside perturbative regime: {0}")]
    PerturbativeRegime(String),

    #[error("Fock-space truncation: {0}")]
    Truncation(String),

    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("input mismatch: {0}")]
    InputMismatch(String),

    /// All optimizer starts failed to converge; `best_cost` is the lowest cost seen.
    #[error("reconstruction failure after {starts} starts (best cost {best_cost:.3e})")]
    ReconstructionFailure {
        starts: usize,
        best_cost: f64,
        best: Box<crate::quantum_core::ComplexMatrix>,
    },

    #[error("fit failed to converge after {iterations} iterations (cost {cost:.3e})")]
    FitFailure {
        iterations: usize,
        cost: f64,
        trace: Vec<f64>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
