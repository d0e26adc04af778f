//! Process parameters, sufficient statistics, regime classification and the
//! maximum-likelihood drift estimator.
//!
//! The process is the square-root diffusion
//!
//! ```text
//! dX_t = (δ + b X_t) dt + 2 √X_t dB_t,    X_0 = 0,
//! ```
//!
//! observed on `[0, T]`. With δ known, the MLE of `b` depends on the path only
//! through `X_T` and `∫₀ᵀ X_t dt`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The triple (δ, b, T).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub delta: f64,
    pub b: f64,
    pub horizon: f64,
}

impl ModelParams {
    /// Validates δ > 0 and T > 0; `b` may have any sign here.
    pub fn new(delta: f64, b: f64, horizon: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid("delta", format!("must be > 0, got {delta}")));
        }
        if !b.is_finite() {
            return Err(Error::invalid("b", format!("must be finite, got {b}")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(
                "horizon",
                format!("must be > 0, got {horizon}"),
            ));
        }
        Ok(Self { delta, b, horizon })
    }

    /// Like [`ModelParams::new`] but also requires the explosive setting b > 0.
    pub fn explosive(delta: f64, b: f64, horizon: f64) -> Result<Self> {
        let p = Self::new(delta, b, horizon)?;
        p.require_explosive()?;
        Ok(p)
    }

    pub fn require_explosive(&self) -> Result<()> {
        if self.b > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(
                "b",
                format!("explosive mode requires b > 0, got {}", self.b),
            ))
        }
    }

    pub fn with_horizon(self, horizon: f64) -> Result<Self> {
        Self::new(self.delta, self.b, horizon)
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        Self::new(delta, self.b, self.horizon)
    }
}

/// `X_T` and `∫₀ᵀ X_t dt` of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub x_t: f64,
    pub int_x: f64,
}

impl SufficientStats {
    pub fn new(x_t: f64, int_x: f64) -> Result<Self> {
        if !(x_t.is_finite() && x_t >= 0.0) {
            return Err(Error::invalid("x_T", format!("must be >= 0, got {x_t}")));
        }
        if !(int_x.is_finite() && int_x >= 0.0) {
            return Err(Error::invalid("int_x", format!("must be >= 0, got {int_x}")));
        }
        if int_x == 0.0 && x_t != 0.0 {
            return Err(Error::invalid(
                "int_x",
                "zero integral with nonzero endpoint is not a path",
            ));
        }
        Ok(Self { x_t, int_x })
    }

    pub fn is_degenerate(&self) -> bool {
        self.int_x == 0.0
    }
}

/// Position of a threshold `d` relative to `−b`, `0` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// d < −b
    BelowMinusB,
    /// d = −b
    AtMinusB,
    /// |d| < b, d ≠ 0
    InteriorNegOrPos,
    /// d = 0
    AtZero,
    /// d > b
    AboveB,
    /// d = b, where the estimator concentrates; no tail approximation exists.
    TruthPoint,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::BelowMinusB => "below_minus_b",
            Regime::AtMinusB => "at_minus_b",
            Regime::InteriorNegOrPos => "interior",
            Regime::AtZero => "at_zero",
            Regime::AboveB => "above_b",
            Regime::TruthPoint => "truth_point",
        }
    }

    /// Upper tail `P(b̂ ≥ d)` for d > b, lower tail `P(b̂ ≤ d)` otherwise.
    pub fn is_upper_tail(&self) -> bool {
        matches!(self, Regime::AboveB)
    }
}

/// Classifies `d` with exact comparisons at the boundary points.
pub fn classify_regime(d: f64, params: &ModelParams) -> Result<Regime> {
    classify_regime_tol(d, params, 0.0)
}

/// Classifies `d`, treating `|d − p| ≤ tol` as equal to the boundary point
/// `p ∈ {−b, 0, b}`.
pub fn classify_regime_tol(d: f64, params: &ModelParams, tol: f64) -> Result<Regime> {
    params.require_explosive()?;
    if !d.is_finite() {
        return Err(Error::invalid("d", format!("must be finite, got {d}")));
    }
    if !(tol >= 0.0) {
        return Err(Error::invalid("tol", format!("must be >= 0, got {tol}")));
    }
    let b = params.b;
    let regime = if (d - b).abs() <= tol {
        Regime::TruthPoint
    } else if (d + b).abs() <= tol {
        Regime::AtMinusB
    } else if d.abs() <= tol {
        Regime::AtZero
    } else if d < -b {
        Regime::BelowMinusB
    } else if d > b {
        Regime::AboveB
    } else {
        Regime::InteriorNegOrPos
    };
    Ok(regime)
}

/// `(X_T − δT) / ∫₀ᵀ X_t dt`.
pub fn mle_drift(stats: &SufficientStats, params: &ModelParams) -> Result<f64> {
    if stats.is_degenerate() {
        return Err(Error::DegeneratePath { x_t: stats.x_t });
    }
    Ok((stats.x_t - params.delta * params.horizon) / stats.int_x)
}

/// `S_T(d) = X_T − δT − d ∫₀ᵀ X_t dt`; `{b̂ ≤ d} = {S_T(d) ≤ 0}` when the
/// integral is positive.
pub fn sufficient_stat_s(stats: &SufficientStats, d: f64, params: &ModelParams) -> f64 {
    stats.x_t - params.delta * params.horizon - d * stats.int_x
}
