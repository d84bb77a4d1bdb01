use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter for {family}: {reason}")]
    InvalidParameter { family: &'static str, reason: String },

    #[error("distribution has infinite mean; {operation} requires a finite mean")]
    InfiniteMean { operation: &'static str },

    #[error("integral diverges: {0}")]
    InfiniteIntegral(String),

    #[error("ratio undefined at x = {x}: reference tail is zero")]
    UndefinedRatio { x: f64 },

    /// A theorem hypothesis does not hold; `condition` names it.
    #[error("precondition violated ({condition}): {detail}")]
    Precondition { condition: &'static str, detail: String },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("insufficient hits: {0}")]
    InsufficientHits(String),

    #[error("misaligned grids: {0}")]
    MisalignedGrids(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(family: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            family,
            reason: reason.into(),
        }
    }

    pub(crate) fn precondition(condition: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            condition,
            detail: detail.into(),
        }
    }

    /// Name of the violated precondition, if this is a precondition error.
    pub fn condition(&self) -> Option<&'static str> {
        match self {
            Error::Precondition { condition, .. } => Some(condition),
            Error::InfiniteMean { .. } => Some("finite mean"),
            _ => None,
        }
    }
}
