use thiserror::Error;

use crate::losses::DomainIssue;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Error type shared by every module in the crate.
///
/// Numeric failures carry enough state to diagnose which stage gave up;
/// quadrature nonconvergence keeps the best estimate and its error bound.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside a function's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid user-facing input (configuration, file contents, sizes).
    #[error("validation error: {0}")]
    Validation(String),

    /// A centered sum `Sᵢ` is zero: every multiplier is undefined.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A loss/shape combination whose defining integral diverges.
    #[error("loss domain: {0}")]
    LossDomain(DomainIssue),

    /// No sign change over the supplied (or grown) root bracket.
    #[error("bracket error: no sign change on [{lo:e}, {hi:e}] (f: {f_lo:e} .. {f_hi:e})")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// An iteration limit was reached before the tolerance.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Adaptive quadrature ran out of subdivisions.
    #[error(
        "quadrature did not converge: best estimate {estimate:e} with error bound {error_bound:e}"
    )]
    QuadratureNonConvergence { estimate: f64, error_bound: f64 },

    /// A documented internal invariant failed; indicates a bug.
    #[error("internal invariant violation: {0}")]
    InternalInvariant(String),
}

impl Error {
    /// Short machine-readable category, stable across messages.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Validation(_) => "validation",
            Error::DegenerateData(_) => "degenerate-data",
            Error::LossDomain(_) => "loss-domain",
            Error::Bracket { .. } => "bracket",
            Error::Convergence(_) => "convergence",
            Error::QuadratureNonConvergence { .. } => "quadrature",
            Error::InternalInvariant(_) => "internal",
        }
    }
}
