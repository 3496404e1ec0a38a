use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("parameters outside the double-precision envelope: {0}")]
    Envelope(String),

    #[error("series did not converge after {terms} terms ({what})")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("coincident nodes: |{a} - {b}| below separation threshold")]
    CoincidentNodes { a: f64, b: f64 },

    #[error("matrix size {size} exceeds limit {limit}")]
    SizeLimit { size: usize, limit: usize },

    #[error("eigensolver failed to converge after {sweeps} sweeps")]
    EigenNonConvergence { sweeps: usize },

    #[error("internal consistency fault: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
