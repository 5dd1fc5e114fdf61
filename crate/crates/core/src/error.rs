use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: domain error: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("{op}: series not converged after {terms} terms (residual bound {residual:.3e} > tolerance {tol:.3e})")]
    TruncationNotConverged {
        op: &'static str,
        terms: usize,
        residual: f64,
        tol: f64,
    },

    #[error("{op}: Laplace inversion unstable: {msg}")]
    InversionUnstable { op: &'static str, msg: String },

    #[error("monte carlo configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }

    pub(crate) fn unstable(op: &'static str, msg: impl Into<String>) -> Self {
        Error::InversionUnstable { op, msg: msg.into() }
    }

    /// Name of the operation that failed, if any.
    pub fn operation(&self) -> &'static str {
        match self {
            Error::Domain { op, .. }
            | Error::TruncationNotConverged { op, .. }
            | Error::InversionUnstable { op, .. } => op,
            Error::Config(_) => "mc",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
