use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension constraint violated: n = {n}, k = {k} (need n >= 2k+1)")]
    DimensionConstraint { n: usize, k: usize },

    #[error("point is singular for this evaluation: {0}")]
    Singular(String),

    #[error("quadrature did not converge: value {value:e}, achieved error {achieved:e}, requested {requested:e}")]
    QuadratureNonConvergence {
        value: f64,
        achieved: f64,
        requested: f64,
    },

    #[error("finite-difference step adaptation failed: best consistency {consistency:e}")]
    StepAdaptation { value: f64, consistency: f64 },

    #[error("optimizer did not converge after {evaluations} evaluations (best objective {best:e})")]
    OptimizerNonConvergence { evaluations: usize, best: f64 },

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
