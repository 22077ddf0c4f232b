use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("register of {requested} qubits exceeds the {cap}-qubit cap")]
    QubitCap { requested: usize, cap: usize },

    #[error("control qubit {0} also appears among the targets")]
    OverlappingQubits(usize),

    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid initial-state descriptor: {0}")]
    InvalidState(String),

    #[error("dataset line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
