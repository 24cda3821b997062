use thiserror::Error;

/// Errors raised by the spectral kernels, the series solver and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    /// A product's frequency support does not fit inside the lattice.
    #[error(
        "frequency support escapes the lattice: needs cutoff {required}, lattice has {available}"
    )]
    CutoffViolation { required: i64, available: i64 },

    #[error("fields live on different lattices")]
    LatticeMismatch,

    #[error("combinatorial budget exceeded: k*j = {requested} > {budget}")]
    BudgetExceeded { requested: usize, budget: usize },

    /// The requested horizon is outside the contraction window of the local theory.
    #[error(
        "horizon {horizon} outside the contraction window: C*T^2*M^(k-1) = {ratio:.3e} > {limit}"
    )]
    TimeTooLarge {
        horizon: f64,
        ratio: f64,
        limit: f64,
    },

    #[error("fixed-point iteration did not contract after {iterations} iterations (last increment {increment:.3e})")]
    NoContraction { iterations: usize, increment: f64 },

    #[error("delta = {delta} violates the case {case} constraint: {constraint}")]
    BadDelta {
        delta: f64,
        case: u8,
        constraint: String,
    },

    #[error("horizon {horizon} outside the resonance window [{lower:.3e}, {upper:.3e}]")]
    WindowViolation {
        horizon: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed tree: {0}")]
    TreeSyntax(String),

    #[error("malformed field stream: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
