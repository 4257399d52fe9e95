use thiserror::Error;

/// Errors produced by the numerics library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its domain.
    #[error("{field} {message}")]
    InvalidParameter { field: &'static str, message: String },

    /// A quadrature or iterative routine did not reach the requested tolerance.
    #[error("accuracy not reached: estimate {estimate:e}, achieved tolerance {achieved:e}, requested {requested:e}")]
    Accuracy {
        estimate: f64,
        achieved: f64,
        requested: f64,
    },

    /// An operation's documented precondition does not hold for the input.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A covariance matrix fails the bona-fide state check.
    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),

    /// A value lies outside the domain of a function (e.g. ν < ½).
    #[error("domain error: {0}")]
    Domain(String),

    /// Eigenvalue pairing or conditioning failed.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// The requested cutoff shape is not supported by this operation.
    #[error("unsupported cutoff shape for {0}")]
    UnsupportedShape(&'static str),

    /// The quadratic creation form does not define a normalizable state.
    #[error("divergent squeezing: spectral norm of the mixing matrix is {norm} (must be < 1)")]
    DivergentSqueezing { norm: f64 },

    /// A bandlimit at or above the lattice Nyquist wavenumber.
    #[error("aliasing: cutoff {cutoff} must lie below the lattice Nyquist wavenumber {nyquist}")]
    Aliasing { cutoff: f64, nyquist: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            message: message.into(),
        }
    }
}
