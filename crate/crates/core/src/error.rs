use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A state vector contained NaN or infinite entries, or had the wrong length.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Two objects that must live on the same mesh (or have the same size) do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// A linear system could not be solved to the requested accuracy.
    #[error("singular or numerically singular operator (achieved relative residual {residual:.3e})")]
    SingularOperator { residual: f64 },

    /// `L(u)` was singular at one of the sampled states during certification.
    #[error("singular operator at sample {sample} (achieved relative residual {residual:.3e})")]
    SingularSample { sample: usize, residual: f64 },

    /// The requested operation is not available for this operator or problem.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// An argument violates the documented preconditions.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A problem specification violates its construction invariants.
    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    /// Not enough recorded data to compute a diagnostic.
    #[error("insufficient data: need at least {needed}, found {found}")]
    InsufficientData { needed: usize, found: usize },

    /// An iteration run did not converge.
    #[error("iteration did not converge (termination: {0})")]
    NotConverged(String),
}

impl Error {
    /// Whether the failure is a singular linear operator.
    pub fn is_singular(&self) -> bool {
        matches!(self, Error::SingularOperator { .. } | Error::SingularSample { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
