use thiserror::Error;

/// Errors raised by the geometry, measure, and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `lambda = r = 0` describes a flat hyperplane through the origin, which has no
    /// finite Euclidean radius.
    #[error("degenerate flat hyperplane (lambda = r = 0) has no finite Euclidean radius")]
    DegenerateFlat,

    /// Adaptive quadrature hit its subdivision cap before meeting the tolerance.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (partial value {partial}, error estimate {abs_error:e})"
    )]
    NonConvergence {
        partial: f64,
        abs_error: f64,
        subdivisions: usize,
    },

    /// The root bracket does not enclose a sign change.
    #[error("invalid bracket [{lo}, {hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    InvalidBracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    /// An integral or series whose value is infinite.
    #[error("divergent: {0}")]
    Divergent(String),

    /// The operation is not available for the requested configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
