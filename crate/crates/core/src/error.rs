use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument or parameter is outside the range where the model is defined.
    #[error("{0}")]
    Domain(String),

    /// A resonance or coupled-mode denominator fell below the underflow floor.
    #[error("singular {context}: |denominator| = {magnitude:e}")]
    Singular {
        context: &'static str,
        magnitude: f64,
    },

    #[error(
        "quadrature did not converge: {panels} -> {refined_panels} panels changed the \
         result by {relative_change:e} (tolerance {tolerance:e})"
    )]
    QuadratureNotConverged {
        panels: usize,
        refined_panels: usize,
        relative_change: f64,
        tolerance: f64,
    },

    #[error("matrix has zero norm")]
    ZeroMatrix,

    #[error("index {index} out of range for {len} retained modes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
