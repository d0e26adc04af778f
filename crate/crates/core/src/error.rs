use thiserror::Error;

use crate::params::Regime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("degenerate path: time integral is zero (x_T = {x_t})")]
    DegeneratePath { x_t: f64 },

    #[error("tilt λ = {lambda} is outside the effective domain for d = {d}")]
    OutOfDomain { lambda: f64, d: f64 },

    #[error("operation not defined in regime {regime:?}: {what}")]
    WrongRegime { regime: Regime, what: &'static str },

    #[error("coefficient not provided in closed form: {0}")]
    CoefficientUnavailable(&'static str),

    #[error("saddle solver failed on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi}): {reason}")]
    SolverFailure {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        reason: &'static str,
    },

    #[error("Riccati solution blew up at s = {at} before the horizon {horizon}")]
    RiccatiBlowUp { at: f64, horizon: f64 },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }

    /// Numerical failures (solver, ODE) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SolverFailure { .. } | Error::RiccatiBlowUp { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
