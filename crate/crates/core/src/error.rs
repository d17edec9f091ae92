use thiserror::Error;

/// Errors produced by construction, solving and diagnostic routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible (matrix/vector dimensions).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter was out of its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A NaN or infinity showed up where only finite values are allowed.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A matrix failed verification against its declared symmetry class.
    #[error("symmetry check failed: {0}")]
    SymmetryViolation(String),

    /// A solver precondition does not hold for the given problem.
    #[error("solver precondition violated: {0}")]
    Precondition(String),

    /// A solver produced non-finite iterates and aborted.
    #[error("{solver} aborted at iteration {iteration}: {message}")]
    SolverAbort {
        solver: String,
        iteration: usize,
        message: String,
    },

    /// A matrix was singular where an inverse or factorization was required.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// A Matrix Market file could not be parsed; `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    MatrixMarket {
        path: String,
        line: usize,
        message: String,
    },

    /// A diagnostic was asked for data the trace does not carry.
    #[error("trace is missing required data: {0}")]
    MissingTraceData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
