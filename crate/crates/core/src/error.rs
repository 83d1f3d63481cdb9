use thiserror::Error;

/// Errors shared across the simulation, compilation and protocol layers.
#[derive(Debug, Error)]
pub enum QsaError {
    #[error("qubit count mismatch: state has {state} qubits, operation expects {expected}")]
    DimensionMismatch { state: usize, expected: usize },

    #[error("{0} qubits exceeds the dense limit of {1}")]
    CapacityExceeded(usize, usize),

    #[error("matrix is not unitary (max deviation {deviation:.3e} > {tolerance:.3e})")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("compile target not met: achieved delta {achieved:.4} > target {target:.4}")]
    BelowTarget { achieved: f64, target: f64 },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("malformed message: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QsaError>;
