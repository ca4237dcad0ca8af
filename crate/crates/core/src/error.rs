use thiserror::Error;

/// Failures raised by the link model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The first-order sideband model was asked to run outside the small-index regime.
    #[error("modulation index {m} exceeds the first-order limit {limit}; use exact mode")]
    RegimeViolation { m: f64, limit: f64 },

    /// Sideband normalization is zero (neither modulator generates sidebands).
    #[error("sideband normalization is undefined: both modulation indices are zero")]
    UndefinedNormalization,

    /// Visibility is undefined when both modulation indices vanish.
    #[error("visibility is undefined for m_a = m_b = 0")]
    UndefinedVisibility,

    /// The design criterion has no finite solution for the given inputs.
    #[error("design criterion has no solution: {0}")]
    NoSolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
