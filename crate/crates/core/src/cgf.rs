//! Normalized cumulant generating function of `S_T(d) = X_T − δT − d ∫X`.
//!
//! For λ in the effective domain
//!
//! ```text
//! Δ_d = { λ : b² + 8dλ > 0,  4λ + b < √(b² + 8dλ) }
//! ```
//!
//! the drift change `b → β = −√(b² + 8dλ)` removes the `∫X` term from the
//! exponent and leaves a chi-square moment generating function, which gives
//!
//! ```text
//! (1/T) log E[exp(λ S_T(d))] = δ L(2λ) + (δ/T) (H(2λ) + R_T(2λ))
//! L(2λ)   = −½ (2λ + (b − β)/2)
//! H(2λ)   = −½ log((1 + h)/2),                    h = (4λ + b)/β
//! R_T(2λ) = −½ log(1 + (1 − h)/(1 + h) · e^{βT})
//! ```
//!
//! `H` and `R_T` both diverge at `h = −1` (λ = 0 among others) while their
//! sum does not, so the total is always evaluated through the joint form
//! `−½ log((1 + h)/2 + (1 − h)/2 · e^{βT})`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ModelParams, SufficientStats};

/// A tilt λ together with its induced β, h and φ = β/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltState {
    pub lambda: f64,
    pub d: f64,
    pub beta: f64,
    pub h: f64,
    pub phi: f64,
    /// `1 + h`, computed without cancellation.
    pub one_plus_h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgfDecomposition {
    pub tilt: TiltState,
    pub l_val: f64,
    /// `+∞` at `h = −1`.
    pub h_val: f64,
    /// `−∞` at `h = −1`.
    pub r_val: f64,
    pub hr_joint: f64,
    pub total: f64,
}

/// Membership in the open domain Δ_d (strict inequalities, no tolerance).
pub fn tilt_domain_contains(lambda: f64, d: f64, params: &ModelParams) -> bool {
    let b = params.b;
    let disc = b * b + 8.0 * d * lambda;
    disc > 0.0 && 4.0 * lambda + b < disc.sqrt()
}

/// Δ_d as an open interval `(lo, hi)` (`lo` may be `−∞`), or `None` when
/// empty (d = b). Requires b > 0.
pub fn tilt_interval(d: f64, params: &ModelParams) -> Option<(f64, f64)> {
    let b = params.b;
    if d > b {
        Some((0.0, 0.5 * (d - b)))
    } else if d == b {
        None
    } else if d <= 0.0 {
        Some((f64::NEG_INFINITY, 0.0))
    } else if d <= 0.5 * b {
        Some((-b * b / (8.0 * d), 0.0))
    } else {
        Some((0.5 * (d - b), 0.0))
    }
}

/// β, h and `1 + h` for a tilt; `None` when `b² + 8dλ ≤ 0`.
pub fn tilt_state(lambda: f64, d: f64, b: f64) -> Option<TiltState> {
    let disc = b * b + 8.0 * d * lambda;
    if !(disc > 0.0) {
        return None;
    }
    let root = disc.sqrt();
    let beta = -root;
    let lin = 4.0 * lambda + b;
    // 1 + h = (lin − root)/β; rationalize when lin and root nearly cancel.
    let numer = if lin > 0.0 {
        8.0 * lambda * (2.0 * lambda + b - d) / (lin + root)
    } else {
        lin - root
    };
    Some(TiltState {
        lambda,
        d,
        beta,
        h: lin / beta,
        phi: 0.5 * beta,
        one_plus_h: numer / beta,
    })
}

/// Evaluates every piece of the decomposition at λ.
///
/// Accepts λ in Δ_d and closure points where the joint `H + R_T` is finite
/// (for instance λ = 0).
pub fn decompose_cgf(lambda: f64, d: f64, params: &ModelParams) -> Result<CgfDecomposition> {
    params.require_explosive()?;
    let out = || Error::OutOfDomain { lambda, d };
    let tilt = tilt_state(lambda, d, params.b).ok_or_else(out)?;
    if tilt.one_plus_h < 0.0 {
        return Err(out());
    }
    let t = params.horizon;
    let e = (tilt.beta * t).exp();
    let l_val = -0.5 * (2.0 * lambda + 0.5 * (params.b - tilt.beta));
    let one_minus_h = 1.0 - tilt.h;
    let joint_arg = 0.5 * tilt.one_plus_h + 0.5 * one_minus_h * e;
    if !(joint_arg > 0.0) {
        return Err(out());
    }
    let hr_joint = -0.5 * joint_arg.ln();
    let (h_val, r_val) = if tilt.one_plus_h == 0.0 {
        (f64::INFINITY, f64::NEG_INFINITY)
    } else {
        (
            -0.5 * (0.5 * tilt.one_plus_h).ln(),
            -0.5 * (one_minus_h / tilt.one_plus_h * e).ln_1p(),
        )
    };
    let total = params.delta * (l_val + hr_joint / t);
    Ok(CgfDecomposition {
        tilt,
        l_val,
        h_val,
        r_val,
        hr_joint,
        total,
    })
}

/// `(1/T) log E[exp(λ S_T(d))] = δ L + (δ/T)(H + R_T)`.
pub fn cgf_total(lambda: f64, d: f64, params: &ModelParams) -> Result<f64> {
    decompose_cgf(lambda, d, params).map(|c| c.total)
}

const RICCATI_BLOWUP: f64 = 1e12;

/// Integrates `ψ' = bψ + 2ψ² − λd`, `ψ(0) = λ` over `[0, T]` with classical
/// RK4, carrying `Y = ∫ψ`. Returns `(ψ(T), Y(T))` or the blow-up time.
fn rk4_riccati(lambda: f64, d: f64, b: f64, horizon: f64, n: usize) -> std::result::Result<(f64, f64), f64> {
    let q = lambda * d;
    let f = |psi: f64| b * psi + 2.0 * psi * psi - q;
    let h = horizon / n as f64;
    let (mut psi, mut y) = (lambda, 0.0);
    for k in 0..n {
        let k1 = f(psi);
        let k2 = f(psi + 0.5 * h * k1);
        let k3 = f(psi + 0.5 * h * k2);
        let k4 = f(psi + h * k3);
        // Y' = ψ, so its RK4 stages are the ψ stage values
        let y1 = psi;
        let y2 = psi + 0.5 * h * k1;
        let y3 = psi + 0.5 * h * k2;
        let y4 = psi + h * k3;
        psi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        y += h / 6.0 * (y1 + 2.0 * y2 + 2.0 * y3 + y4);
        if !psi.is_finite() || psi.abs() > RICCATI_BLOWUP {
            return Err((k + 1) as f64 * h);
        }
    }
    Ok((psi, y))
}

/// Independent evaluation of the normalized CGF through the affine transform
/// `E[exp(λX_T − λd∫X)] = exp(δ ∫₀ᵀ ψ)`, so that the CGF equals
/// `δ (∫ψ / T − λ)`. Step count doubles until the RK4 error estimate
/// `|Y_n − Y_{n/2}| / 15` is below 1e-12 relative.
pub fn riccati_oracle(lambda: f64, d: f64, params: &ModelParams) -> Result<f64> {
    let t = params.horizon;
    let speed = params.b.abs() + (params.b * params.b + 8.0 * (d * lambda).abs()).sqrt() + 4.0 * lambda.abs();
    let mut n = ((t * speed * 64.0).ceil() as usize).max(256);
    let blowup = |at: f64| Error::RiccatiBlowUp { at, horizon: t };
    let mut prev = rk4_riccati(lambda, d, params.b, t, n).map_err(blowup)?.1;
    loop {
        n *= 2;
        let cur = rk4_riccati(lambda, d, params.b, t, n).map_err(blowup)?.1;
        if (cur - prev).abs() / 15.0 <= 1e-12 * cur.abs().max(1e-3) || n >= 1 << 24 {
            return Ok(params.delta * (cur / t - lambda));
        }
        prev = cur;
    }
}

/// ψ at `s = T − t_{k+½}` for each of `n_steps` uniform steps `k`, i.e. the
/// Riccati solution read backwards in time at step midpoints.
///
/// Under the exponentially tilted law `∝ exp(λ S_T(d)) dP`, the process is
/// again a square-root diffusion with the same δ and time-varying drift
/// coefficient `b + 4 ψ(T − t)`.
pub fn riccati_profile(lambda: f64, d: f64, params: &ModelParams, n_steps: usize) -> Result<Vec<f64>> {
    let t = params.horizon;
    let b = params.b;
    let q = lambda * d;
    let f = |psi: f64| b * psi + 2.0 * psi * psi - q;
    let sub = 16usize;
    let h = t / (n_steps * sub) as f64;
    let mut out = vec![0.0; n_steps];
    let mut psi = lambda;
    for j in 0..n_steps {
        for m in 0..sub {
            let k1 = f(psi);
            let k2 = f(psi + 0.5 * h * k1);
            let k3 = f(psi + 0.5 * h * k2);
            let k4 = f(psi + h * k3);
            psi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !psi.is_finite() || psi.abs() > RICCATI_BLOWUP {
                return Err(Error::RiccatiBlowUp {
                    at: (j * sub + m + 1) as f64 * h,
                    horizon: t,
                });
            }
            if m + 1 == sub / 2 {
                out[n_steps - 1 - j] = psi;
            }
        }
    }
    Ok(out)
}

/// `log dP_{δ,from}/dP_{δ,to}` on `F_T` for paths started at zero:
/// `((b − β)/4)(X_T − δT) − (1/8)(b² − β²) ∫X`.
pub fn girsanov_log_density(stats: &SufficientStats, from_drift: f64, to_drift: f64, params: &ModelParams) -> f64 {
    let (b, beta) = (from_drift, to_drift);
    0.25 * (b - beta) * (stats.x_t - params.delta * params.horizon)
        - 0.125 * (b * b - beta * beta) * stats.int_x
}
