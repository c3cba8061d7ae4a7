use thiserror::Error;

use crate::quadrature::{MeshStep, Side};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A value left the floating-point range. The quadrature engine treats
    /// this as the end of a side of the sum rather than as a failure.
    #[error("overflow: {0}")]
    Overflow(String),

    #[error("{0}")]
    InvalidParameter(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("unknown builtin integrand `{0}` (expected `runge` or `expdecay`)")]
    UnknownBuiltin(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("symmetric formula not applicable: {0}")]
    Symmetry(String),

    #[error(
        "terms grow on the {side} side up to k = {k}; \
         the integrand does not decay fast enough along the contour"
    )]
    Divergence { side: Side, k: usize },

    #[error("no convergence: {message}")]
    NoConvergence {
        message: String,
        history: Vec<MeshStep>,
    },
}

impl Error {
    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Parse { .. }
                | Error::UnknownIdentifier { .. }
                | Error::UnknownBuiltin(_)
                | Error::Symmetry(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
