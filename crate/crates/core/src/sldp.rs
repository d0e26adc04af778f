//! Sharp tail approximations for the drift MLE, one per regime of `d`.
//!
//! Each returns the leading term in log space together with the correction
//! terms that are available in closed form:
//!
//! | regime      | tail           | corrections                    |
//! |-------------|----------------|--------------------------------|
//! | d < −b      | `P(b̂ ≤ d)`     | none                           |
//! | d > b       | `P(b̂ ≥ d)`     | `γ̃₁/T`                         |
//! | 0 < \|d\| < b | `P(b̂ ≤ d)`   | `γ̃₁/T`                         |
//! | d = −b      | `P(b̂ ≤ −b)`    | `γ̃₁/√T`                        |
//! | d = 0       | `P(b̂ ≤ 0)`     | `Σ h_k (T e^{−bT})^k`, any order |
//!
//! The first-order corrections for d > b, 0 < |d| < b and d = −b come from
//! the `A_T` factor only; the matching `B_T` coefficients are not known in
//! closed form, so these orders are approximation-grade.
//!
//! The d = 0 tail also has an exact value, `P(χ²_δ ≤ δT/L_T)`, exposed as
//! [`exact_tail_at_zero`] for comparison.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{classify_regime, ModelParams, Regime};
use crate::rate::{first_order_coeff, rate_function};
use crate::special::{ln_chi_square_cdf, ln_gamma};

/// Default for the `T · I(d)` validity threshold.
pub const MIN_T_RATE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailApprox {
    pub regime: Regime,
    pub d: f64,
    pub horizon: f64,
    /// Log of prefactor times exponential term.
    pub log_leading: f64,
    /// Series terms actually applied inside `1 + Σ`.
    pub correction_terms: Vec<f64>,
    pub order_p: u32,
    pub log_value: f64,
    pub value: f64,
    /// `T · I(d)`, used by the validity flag.
    pub t_rate: f64,
    pub valid: bool,
}

impl TailApprox {
    fn assemble(
        regime: Regime,
        d: f64,
        horizon: f64,
        params: &ModelParams,
        log_leading: f64,
        correction_terms: Vec<f64>,
        order_p: u32,
    ) -> Result<Self> {
        let factor = 1.0 + correction_terms.iter().sum::<f64>();
        let log_value = log_leading + factor.ln();
        let value = log_value.exp();
        let t_rate = horizon * rate_function(d, params)?.rate;
        let mut out = Self {
            regime,
            d,
            horizon,
            log_leading,
            correction_terms,
            order_p,
            log_value,
            value,
            t_rate,
            valid: false,
        };
        out.revalidate(MIN_T_RATE);
        Ok(out)
    }

    /// Recomputes the validity flag against a custom `T · I(d)` threshold.
    pub fn revalidate(&mut self, min_t_rate: f64) {
        self.valid = self.value.is_finite() && self.value <= 1.0 && self.t_rate >= min_t_rate;
    }
}

fn positive_ln(x: f64, what: &'static str) -> f64 {
    assert!(x > 0.0, "log argument of {what} must be positive, got {x}");
    x.ln()
}

fn expect_regime(d: f64, params: &ModelParams, want: Regime, what: &'static str) -> Result<()> {
    let regime = classify_regime(d, params)?;
    if regime != want {
        return Err(Error::WrongRegime { regime, what });
    }
    Ok(())
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid("T", format!("must be > 0, got {horizon}")));
    }
    Ok(())
}

fn check_order(order_p: u32, max: u32, what: &'static str) -> Result<()> {
    if order_p > max {
        return Err(Error::CoefficientUnavailable(what));
    }
    Ok(())
}

/// `H(a_d) = −½ log((d + b)(3d − b)/(4d²))` for d < −b.
pub fn h_at_minimizer(d: f64, b: f64) -> f64 {
    -0.5 * positive_ln((d + b) * (3.0 * d - b) / (4.0 * d * d), "H(a_d)")
}

/// `K₁(d) = −½ log((d − b)/((2d − b)(3d − b)))` for d > b.
pub fn k1(d: f64, b: f64) -> f64 {
    -0.5 * positive_ln((d - b) / ((2.0 * d - b) * (3.0 * d - b)), "K1")
}

/// `K₂(d) = (3d − b)(d − b)/(2d − b)` for d > b.
pub fn k2(d: f64, b: f64) -> f64 {
    (3.0 * d - b) * (d - b) / (2.0 * d - b)
}

/// `J(d) = −½ log(2(b − d)/(b(d + b)))` for |d| < b.
pub fn j_coeff(d: f64, b: f64) -> f64 {
    -0.5 * positive_ln(2.0 * (b - d) / (b * (d + b)), "J")
}

/// `P(b̂ ≤ d)` for d < −b:
/// `−exp(−δT I¹(d) + δH(a_d)) / (a_d σ_d √(2πT))`, `σ_d² = −1/d`.
pub fn tail_below_minus_b(d: f64, horizon: f64, params: &ModelParams, order_p: u32) -> Result<TailApprox> {
    expect_regime(d, params, Regime::BelowMinusB, "tail_below_minus_b needs d < −b")?;
    check_horizon(horizon)?;
    check_order(order_p, 0, "c_{d,1} for d < −b is not given in closed form")?;
    let (b, delta) = (params.b, params.delta);
    let unit_rate = -(d - b) * (d - b) / (8.0 * d);
    let a_d = (d * d - b * b) / (4.0 * d);
    let sigma_d = (-1.0 / d).sqrt();
    let log_leading = -delta * horizon * unit_rate + delta * h_at_minimizer(d, b)
        - positive_ln(-a_d * sigma_d * (2.0 * std::f64::consts::PI * horizon).sqrt(), "prefactor");
    TailApprox::assemble(Regime::BelowMinusB, d, horizon, params, log_leading, vec![], order_p)
}

/// `P(b̂ ≥ d)` for d > b:
/// `(δT/2)^{δ/2−1} exp(−δT I¹(d) + δK₁(d)) / (K₂(d) Γ(δ/2))`.
pub fn tail_above_b(d: f64, horizon: f64, params: &ModelParams, order_p: u32) -> Result<TailApprox> {
    expect_regime(d, params, Regime::AboveB, "tail_above_b needs d > b")?;
    check_horizon(horizon)?;
    check_order(order_p, 1, "only the first-order A_T coefficient is known for d > b")?;
    let (b, delta) = (params.b, params.delta);
    let unit_rate = 0.5 * (2.0 * d - b);
    let log_leading = (0.5 * delta - 1.0) * (0.5 * delta * horizon).ln() - delta * horizon * unit_rate
        + delta * k1(d, b)
        - positive_ln(k2(d, b), "K2")
        - ln_gamma(0.5 * delta);
    let corrections = if order_p >= 1 {
        vec![first_order_coeff(d, params)? / horizon]
    } else {
        vec![]
    };
    TailApprox::assemble(Regime::AboveB, d, horizon, params, log_leading, corrections, order_p)
}

/// `P(b̂ ≤ d)` for 0 < |d| < b:
/// `(δT/2)^{δ/2−1} exp(−δT b/2 + δJ(d)) / Γ(δ/2)`.
pub fn tail_interior(d: f64, horizon: f64, params: &ModelParams, order_p: u32) -> Result<TailApprox> {
    expect_regime(d, params, Regime::InteriorNegOrPos, "tail_interior needs 0 < |d| < b")?;
    check_horizon(horizon)?;
    check_order(order_p, 1, "only the first-order A_T coefficient is known for |d| < b")?;
    let (b, delta) = (params.b, params.delta);
    let log_leading = (0.5 * delta - 1.0) * (0.5 * delta * horizon).ln() - delta * horizon * 0.5 * b
        + delta * j_coeff(d, b)
        - ln_gamma(0.5 * delta);
    let corrections = if order_p >= 1 {
        vec![first_order_coeff(d, params)? / horizon]
    } else {
        vec![]
    };
    TailApprox::assemble(Regime::InteriorNegOrPos, d, horizon, params, log_leading, corrections, order_p)
}

/// Leading coefficient `c₁` of `B_T` at d = −b:
/// `e^{−δ/4} δ^{(δ−2)/4} / (2^{δ/2} Γ((δ+2)/4))`.
pub fn minus_b_c1(params: &ModelParams) -> f64 {
    let delta = params.delta;
    (-0.25 * delta + 0.25 * (delta - 2.0) * delta.ln()
        - 0.5 * delta * std::f64::consts::LN_2
        - ln_gamma(0.25 * (delta + 2.0)))
    .exp()
}

/// `P(b̂ ≤ −b)`:
/// `(δT)^{δ/4−1/2} (b/2)^{δ/4} exp(−δT b/2) / Γ((δ+2)/4)`, with the
/// optional `1 + γ̃₁/√T` correction.
pub fn tail_at_minus_b(horizon: f64, params: &ModelParams, order_p: u32) -> Result<TailApprox> {
    params.require_explosive()?;
    check_horizon(horizon)?;
    check_order(order_p, 1, "only g_1 ≈ γ̃₁ is available at d = −b")?;
    let (b, delta) = (params.b, params.delta);
    let d = -b;
    let log_leading = (0.25 * delta - 0.5) * (delta * horizon).ln() + 0.25 * delta * (0.5 * b).ln()
        - delta * horizon * 0.5 * b
        - ln_gamma(0.25 * (delta + 2.0));
    let corrections = if order_p >= 1 {
        vec![first_order_coeff(d, params)? / horizon.sqrt()]
    } else {
        vec![]
    };
    TailApprox::assemble(Regime::AtMinusB, d, horizon, params, log_leading, corrections, order_p)
}

/// `h_k = (−1)^k δ / ((2k + δ) k!) · (δb/2)^k`.
pub fn h_coefficient(k: u32, params: &ModelParams) -> f64 {
    let delta = params.delta;
    let kf = k as f64;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let log_mag = delta.ln() - (2.0 * kf + delta).ln() - ln_gamma(kf + 1.0) + kf * (0.5 * delta * params.b).ln();
    sign * log_mag.exp()
}

/// `P(b̂ ≤ 0)` to order `p` in `T e^{−bT}`:
/// `(δbT/2)^{δ/2} exp(−δTb/2) / (√(δ/2) Γ(δ/2)) · [1 + Σ_{k≤p} h_k (T e^{−bT})^k]`.
pub fn tail_at_zero(horizon: f64, params: &ModelParams, order_p: u32) -> Result<TailApprox> {
    params.require_explosive()?;
    check_horizon(horizon)?;
    let (b, delta) = (params.b, params.delta);
    let log_leading = 0.5 * delta * (0.5 * delta * b * horizon).ln() - 0.5 * delta * b * horizon
        - 0.5 * (0.5 * delta).ln()
        - ln_gamma(0.5 * delta);
    let x = horizon * (-b * horizon).exp();
    let corrections = (1..=order_p)
        .map(|k| h_coefficient(k, params) * x.powi(k as i32))
        .collect();
    TailApprox::assemble(Regime::AtZero, 0.0, horizon, params, log_leading, corrections, order_p)
}

/// `ln P(b̂ ≤ 0) = ln P(χ²_δ ≤ d_T)` with `d_T = δT/L_T`,
/// `L_T = (e^{bT} − 1)/b`.
pub fn ln_exact_tail_at_zero(horizon: f64, params: &ModelParams) -> Result<f64> {
    params.require_explosive()?;
    check_horizon(horizon)?;
    let (b, delta) = (params.b, params.delta);
    // ln d_T = ln(δ b T) − bT − ln(1 − e^{−bT})
    let ln_d_t = (delta * b * horizon).ln() - b * horizon - (-(-b * horizon).exp_m1()).ln();
    Ok(ln_chi_square_cdf(delta, ln_d_t))
}

pub fn exact_tail_at_zero(horizon: f64, params: &ModelParams) -> Result<f64> {
    ln_exact_tail_at_zero(horizon, params).map(f64::exp)
}

/// Dispatches on the regime of `d`.
pub fn tail_approx(d: f64, horizon: f64, params: &ModelParams, order_p: u32) -> Result<TailApprox> {
    match classify_regime(d, params)? {
        Regime::BelowMinusB => tail_below_minus_b(d, horizon, params, order_p),
        Regime::AboveB => tail_above_b(d, horizon, params, order_p),
        Regime::InteriorNegOrPos => tail_interior(d, horizon, params, order_p),
        Regime::AtMinusB => tail_at_minus_b(horizon, params, order_p),
        Regime::AtZero => tail_at_zero(horizon, params, order_p),
        regime @ Regime::TruthPoint => Err(Error::WrongRegime {
            regime,
            what: "no tail approximation at d = b",
        }),
    }
}
