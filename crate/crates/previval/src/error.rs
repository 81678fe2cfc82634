use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an out-of-contract value.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A state vector that must be normalized is not.
    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    /// The preparation ensemble contains no members.
    #[error("preparation ensemble is empty: no prior information supplied")]
    EmptyEnsemble,

    /// A preparation label was not found in the ensemble.
    #[error("unknown preparation label {0:?}")]
    UnknownLabel(String),

    /// Conditioning on a measurement outcome that has zero probability.
    ///
    /// Distinct from [`Error::InvalidParameter`]: the inputs are valid, but
    /// the requested outcome cannot occur for them, so the conditional
    /// probability is undefined (0/0).
    #[error("measurement outcome has zero probability at lambda_tau = {lambda_tau}")]
    ZeroProbabilityOutcome { lambda_tau: f64 },

    /// A joint state does not match the dimension of the operator applied to it.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A malformed scan configuration file, with the 1-based line number.
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
