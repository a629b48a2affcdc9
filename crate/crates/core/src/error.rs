use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Closed-form metrics are derived for equal source and jamming power.
    #[error(
        "analytic metrics assume equal source and jamming power (p_s = p_d), got p_s = {p_s} W, p_d = {p_d} W"
    )]
    UnequalPowers { p_s: f64, p_d: f64 },

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Adaptive integration gave up before meeting the requested tolerance.
#[derive(Debug, Clone, PartialEq, Error)]
#[error(
    "quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error bound {error_bound:e})"
)]
pub struct QuadratureError {
    pub estimate: f64,
    pub error_bound: f64,
    pub subdivisions: usize,
}
