//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the mathematical domain of the operation
    /// (negative where nonnegative is required, non-finite, out-of-range
    /// exponent, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Grid functions with incompatible domains or lengths.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A named structural precondition does not hold. The message starts
    /// with the condition tag, e.g. `(V1)`, `(m1)`, `lipschitz`.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The N-function does not support the requested construction
    /// (e.g. the Sobolev conjugate when (M3) fails).
    #[error("unsupported spec: {0}")]
    Unsupported(String),

    /// A monotone inversion target fell outside the tabulated range;
    /// the caller must extend `eval_range`.
    #[error("range exceeded: {0}")]
    Range(String),

    /// The spec itself is malformed (non-monotone tabulation, bad knots).
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// A spec that is formally valid but degenerate for the operation
    /// (e.g. ξ ≡ 0 in a coercivity check).
    #[error("degenerate spec: {0}")]
    Degenerate(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
