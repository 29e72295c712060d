//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Two objects that must share a dimension do not.
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    /// A covariance matrix failed its Cholesky factorization.
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    /// All eigenvalues vanish; the quadratic form has no distribution to invert.
    #[error("degenerate spectrum: second cumulant is zero")]
    DegenerateSpectrum,

    /// The Fourier inversion could not meet its error tolerance.
    #[error("density inversion failed: {0}")]
    InversionFailure(String),

    /// Tail parameters could not be estimated from the inverted density.
    #[error("tail fit unavailable: {0}")]
    TailFitUnavailable(String),

    /// A probability level outside (0, 1).
    #[error("probability {0} is outside (0, 1)")]
    OutOfRange(f64),

    /// Closed forms exist only for the stochastic-trend model.
    #[error("no closed form for the {model} model: {hint}")]
    ModelUnsupported {
        model: &'static str,
        hint: &'static str,
    },

    /// Transaction costs exceed the profitability bound; the optimal
    /// timescale does not exist.
    #[error("no profitable timescale: cost {theta} is at or above the bound for beta0^2/lambda = {c}")]
    NoProfitableEta { theta: f64, c: f64 },

    /// Input series shorter than an operation requires.
    #[error("series too short: need at least {need} points, got {got}")]
    SeriesTooShort { need: usize, got: usize },

    /// Prices must be strictly positive to take log-returns.
    #[error("non-positive price {value} at index {index}")]
    NonPositivePrice { index: usize, value: f64 },

    /// The variogram fit did not converge to an interior optimum.
    #[error("calibration fit failed: {0}")]
    FitFailure(String),
}
