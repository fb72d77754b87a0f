//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by validation and numerical routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix expected to be Hermitian deviates beyond tolerance.
    #[error("matrix is not Hermitian: |M - M^dag| = {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NonHermitian { deviation: f64, tol: f64 },

    /// Matrix expected to be positive semidefinite has a genuinely negative eigenvalue.
    #[error("matrix is not PSD: eigenvalue {eigenvalue:.6e} below -{tol:.3e}")]
    NotPsd { eigenvalue: f64, tol: f64 },

    /// Operand shapes are incompatible with the requested operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Kraus operators in one family disagree in shape, or the family is empty.
    #[error("kraus shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Sum of K_j^dag K_j deviates from the identity beyond tolerance.
    #[error("not trace preserving: |sum K^dag K - 1| = {deviation:.3e}")]
    NotTracePreserving { deviation: f64 },

    /// Matrix expected to be unitary fails U^dag U = 1.
    #[error("matrix is not unitary: |U^dag U - 1| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    /// Mixture or probability weights are negative or do not sum to one.
    #[error("bad weights: {0}")]
    BadWeights(String),

    /// Requested minimax route cannot be assembled for these channels.
    #[error("route unavailable: {0}")]
    RouteUnavailable(String),

    /// Iterative search exhausted its budget without meeting the tolerance.
    #[error("no convergence after {iterations} iterations (best value {best:.12e})")]
    NoConvergence { iterations: usize, best: f64 },

    /// Scalar argument outside its admissible range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Operator expected to satisfy 0 <= E <= 1 does not.
    #[error("not an effect: eigenvalue {eigenvalue:.6e} outside [0, 1]")]
    NotEffect { eigenvalue: f64 },

    /// Kernel columns are not probability distributions.
    #[error("kernel is not stochastic: {0}")]
    NotStochastic(String),

    /// Classical weight vector has zero total mass.
    #[error("zero mass: {0}")]
    ZeroMass(String),

    /// POVM elements are not PSD or do not sum to the identity.
    #[error("not a POVM: {0}")]
    NotPovm(String),

    /// Lindblad step size too large for the first-order Kraus construction.
    #[error("epsilon too large: 1 - eps/2 * |X^dag X| = {margin:.6e} is not positive")]
    EpsilonTooLarge { margin: f64 },

    /// Bit-commitment inequality chain violated beyond tolerance.
    #[error("cheat-bound chain violated: {0}")]
    ChainViolation(String),

    /// Parameter required to be strictly positive.
    #[error("non-positive parameter: {0}")]
    NonPositiveParameter(String),

    /// Matrix entries must all be finite.
    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    /// Invalid optimizer configuration.
    #[error("bad optimizer config: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
