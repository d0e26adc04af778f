//! Rate function of the drift MLE, a numerical Legendre-type oracle for it,
//! and the finite-horizon saddle point.
//!
//! Functions of `a` take the tilt in the doubled scale `a = 2λ` used by the
//! decomposition `L(a)`, `H(a)`.

use serde::Serialize;

use crate::cgf::{tilt_interval, tilt_state};
use crate::error::{Error, Result};
use crate::params::{classify_regime, ModelParams, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub d: f64,
    pub rate: f64,
    /// Minimizer of `L` over the closure of the domain (in the `a = 2λ` scale).
    pub a_d: f64,
    /// Whether `a_d` sits on the boundary of the domain.
    pub boundary: bool,
}

/// Rate for δ = 1; the δ-dependence is a single multiplication.
fn unit_rate(d: f64, b: f64) -> (f64, f64, bool) {
    if d <= -b {
        let rate = -(d - b) * (d - b) / (8.0 * d);
        // `+ 0.0` turns the −0 at d = −b into 0
        (rate, (d * d - b * b) / (4.0 * d) + 0.0, d == -b)
    } else if d.abs() < b {
        (0.5 * b, 0.0, true)
    } else if d == b {
        (0.0, 0.0, true)
    } else {
        (0.5 * (2.0 * d - b), d - b, true)
    }
}

/// Piecewise closed form:
///
/// ```text
/// −δ(d − b)²/(8d)   d ≤ −b
/// δb/2              |d| < b
/// 0                 d = b
/// δ(2d − b)/2       d > b
/// ```
pub fn rate_function(d: f64, params: &ModelParams) -> Result<RatePoint> {
    params.require_explosive()?;
    if !d.is_finite() {
        return Err(Error::invalid("d", format!("must be finite, got {d}")));
    }
    let (unit, a_d, boundary) = unit_rate(d, params.b);
    Ok(RatePoint {
        d,
        rate: params.delta * unit,
        a_d,
        boundary,
    })
}

/// `I_b^δ(d) == δ · I_b^1(d)`, compared bitwise.
pub fn delta_scaling_check(d: f64, params: &ModelParams) -> Result<bool> {
    let full = rate_function(d, params)?.rate;
    let unit = rate_function(d, &params.with_delta(1.0)?)?.rate;
    Ok(full == params.delta * unit)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a concave function on `[lo, hi]`,
/// endpoints included.
fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let (l0, h0) = (lo, hi);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (lo + hi);
    [(mid, f(mid)), (l0, f(l0)), (h0, f(h0))]
        .into_iter()
        .fold((mid, f64::NEG_INFINITY), |best, (x, v)| if v > best.1 { (x, v) } else { best })
}

/// `(sup, argmax λ)` of `−δ L(2λ)` over the closure of Δ_d.
pub fn rate_oracle_argmax(d: f64, params: &ModelParams) -> Result<(f64, f64)> {
    params.require_explosive()?;
    let b = params.b;
    let neg_l = |lambda: f64| {
        let disc = (b * b + 8.0 * d * lambda).max(0.0);
        params.delta * (lambda + 0.25 * (b + disc.sqrt()))
    };
    let Some((lo, hi)) = tilt_interval(d, params) else {
        // empty domain at the truth point
        return Ok((0.0, 0.0));
    };
    let lo = if lo.is_finite() {
        lo
    } else {
        // concave and → −∞ as λ → −∞: walk left until it decreases
        let mut k = 1.0;
        while neg_l(hi - 2.0 * k) >= neg_l(hi - k) {
            k *= 2.0;
        }
        hi - 2.0 * k
    };
    let (arg, val) = golden_max(neg_l, lo, hi, 1e-12 * (1.0 + (hi - lo).abs()));
    Ok((val, arg))
}

pub fn rate_oracle(d: f64, params: &ModelParams) -> Result<f64> {
    rate_oracle_argmax(d, params).map(|(v, _)| v)
}

/// `L′(a) = −½ (1 − d/β)`.
pub fn l_prime(a: f64, d: f64, b: f64) -> f64 {
    let beta = -(b * b + 4.0 * a * d).sqrt();
    -0.5 * (1.0 - d / beta)
}

/// `H′(a) = −½ h′(a) / (1 + h(a))` with `h′ = 2/β − 2d(2a + b)/β³`.
pub fn h_prime(a: f64, d: f64, b: f64) -> f64 {
    let s = tilt_state(0.5 * a, d, b).expect("b² + 4ad > 0");
    let beta = s.beta;
    let dh = 2.0 / beta - 2.0 * d * (2.0 * a + b) / (beta * beta * beta);
    -0.5 * dh / s.one_plus_h
}

/// `L(a) = −½ (a + (b − β)/2)`.
pub fn l_of(a: f64, d: f64, b: f64) -> f64 {
    let beta = -(b * b + 4.0 * a * d).sqrt();
    -0.5 * (a + 0.5 * (b - beta))
}

/// `H(a) = −½ log((1 + h)/2)`.
pub fn h_of(a: f64, d: f64, b: f64) -> f64 {
    let s = tilt_state(0.5 * a, d, b).expect("b² + 4ad > 0");
    -0.5 * (0.5 * s.one_plus_h).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleSolution {
    pub a_t: f64,
    pub residual: f64,
    pub iterations: usize,
}

pub const SADDLE_TOLERANCE: f64 = 1e-10;

/// Interior solution of `L′(a) + H′(a)/T = 0`.
///
/// Defined where the minimizer of `L` sits on the upper end of the domain:
/// d > b, 0 < |d| < b, d = −b, and d = 0. The bracket is grown from that
/// boundary by halving the distance to it until the equation changes sign,
/// then refined by bisection to machine resolution.
pub fn solve_saddle(d: f64, horizon: f64, params: &ModelParams) -> Result<SaddleSolution> {
    let regime = classify_regime(d, params)?;
    match regime {
        Regime::AboveB | Regime::InteriorNegOrPos | Regime::AtMinusB | Regime::AtZero => {}
        _ => {
            return Err(Error::WrongRegime {
                regime,
                what: "finite-horizon saddle needs a boundary minimizer",
            })
        }
    }
    if !(horizon > 0.0) {
        return Err(Error::invalid("horizon", format!("must be > 0, got {horizon}")));
    }
    let b = params.b;
    let (lam_lo, lam_hi) = tilt_interval(d, params).expect("non-empty away from d = b");
    let (lo, hi) = (2.0 * lam_lo, 2.0 * lam_hi);
    let f = |a: f64| l_prime(a, d, b) + h_prime(a, d, b) / horizon;
    let width = if lo.is_finite() { (hi - lo).min(1.0) } else { 1.0 };

    // upper end: f → +∞ as a → hi
    let mut gap = 0.5 * width;
    let mut a_hi = hi - gap;
    let mut f_hi = f(a_hi);
    while !(f_hi > 0.0) {
        gap *= 0.5;
        if gap < 1e-300 || hi - gap == hi {
            return Err(Error::SolverFailure {
                lo: a_hi,
                hi,
                f_lo: f_hi,
                f_hi,
                reason: "no positive value next to the boundary",
            });
        }
        a_hi = hi - gap;
        f_hi = f(a_hi);
    }

    // lower end: move away from the boundary until f < 0
    let mut a_lo = a_hi;
    let mut f_lo = f_hi;
    let mut dist = gap;
    for _ in 0..2000 {
        if f_lo < 0.0 {
            break;
        }
        a_lo = if lo.is_finite() {
            0.5 * (a_lo + lo)
        } else {
            dist *= 2.0;
            hi - dist
        };
        f_lo = f(a_lo);
    }
    if !(f_lo < 0.0) {
        return Err(Error::SolverFailure {
            lo: a_lo,
            hi: a_hi,
            f_lo,
            f_hi,
            reason: "no sign change in bracket",
        });
    }

    let mut iterations = 0;
    let (mut x_lo, mut x_hi) = (a_lo, a_hi);
    let mut mid = 0.5 * (x_lo + x_hi);
    let mut f_mid = f(mid);
    while iterations < 400 {
        iterations += 1;
        mid = 0.5 * (x_lo + x_hi);
        f_mid = f(mid);
        if f_mid == 0.0 || mid == x_lo || mid == x_hi {
            break;
        }
        if f_mid < 0.0 {
            x_lo = mid;
        } else {
            x_hi = mid;
        }
    }
    if !(f_mid.abs() <= SADDLE_TOLERANCE) {
        return Err(Error::SolverFailure {
            lo: x_lo,
            hi: x_hi,
            f_lo: f(x_lo),
            f_hi: f(x_hi),
            reason: "bracket collapsed above tolerance",
        });
    }
    Ok(SaddleSolution {
        a_t: mid,
        residual: f_mid,
        iterations,
    })
}

/// First-order coefficient `γ̃₁` of the `A_T` factor.
///
/// ```text
/// d > b:       −δ d(d² − 3bd + b²) / ((d − b)(2d − b)(3d − b)²)
/// 0 < |d| < b: −δ d(d² + bd − b²) / (b(d − b)(d + b)²)
/// d = −b:      3δ / (2√b)
/// ```
pub fn first_order_coeff(d: f64, params: &ModelParams) -> Result<f64> {
    let regime = classify_regime(d, params)?;
    let (b, delta) = (params.b, params.delta);
    match regime {
        Regime::AboveB => Ok(-delta * d * (d * d - 3.0 * b * d + b * b)
            / ((d - b) * (2.0 * d - b) * (3.0 * d - b).powi(2))),
        Regime::InteriorNegOrPos => {
            Ok(-delta * d * (d * d + b * d - b * b) / (b * (d - b) * (d + b).powi(2)))
        }
        Regime::AtMinusB => Ok(3.0 * delta / (2.0 * b.sqrt())),
        _ => Err(Error::WrongRegime {
            regime,
            what: "first-order coefficient is only stated for d > b, 0 < |d| < b and d = −b",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(delta: f64, b: f64) -> ModelParams {
        ModelParams::explosive(delta, b, 1.0).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(rate_function(1.0, &params(1.0, 1.0)).unwrap().rate, 0.0);
        assert_eq!(rate_function(2.0, &params(1.0, 1.0)).unwrap().rate, 1.5);
        assert_eq!(rate_function(-2.0, &params(1.0, 1.0)).unwrap().rate, 0.5625);
        assert_eq!(rate_function(0.5, &params(3.0, 1.0)).unwrap().rate, 1.5);
        let p = rate_function(-2.0, &params(1.0, 1.0)).unwrap();
        assert_eq!(p.a_d, -0.375);
        assert!(!p.boundary);
        let p = rate_function(2.0, &params(1.0, 1.0)).unwrap();
        assert_eq!(p.a_d, 1.0);
        assert!(p.boundary);
    }

    #[test]
    fn continuity_at_minus_b() {
        let p = params(2.0, 1.3);
        let left = rate_function(-1.3 - 1e-9, &p).unwrap().rate;
        let at = rate_function(-1.3, &p).unwrap().rate;
        let right = rate_function(-1.3 + 1e-9, &p).unwrap().rate;
        assert!((left - at).abs() < 1e-8);
        assert!((right - at).abs() < 1e-8);
        assert!((at - 1.3).abs() < 1e-15);
    }

    #[test]
    fn lower_semicontinuous_at_b() {
        let p = params(1.0, 1.0);
        let left = rate_function(1.0 - 1e-12, &p).unwrap().rate;
        let right = rate_function(1.0 + 1e-12, &p).unwrap().rate;
        assert!((left - 0.5).abs() < 1e-11 && (right - 0.5).abs() < 1e-11);
        assert_eq!(rate_function(1.0, &p).unwrap().rate, 0.0);
    }

    #[test]
    fn scaling_examples() {
        assert!(delta_scaling_check(2.0, &params(2.5, 1.0)).unwrap());
        assert!(delta_scaling_check(-3.0, &params(7.0, 1.0)).unwrap());
        assert!(delta_scaling_check(0.0, &params(1.0, 1.0)).unwrap());
    }

    #[test]
    fn oracle_argmax_locations() {
        let p = params(1.0, 1.0);
        let (v, arg) = rate_oracle_argmax(-2.0, &p).unwrap();
        assert!((arg + 0.1875).abs() < 1e-6);
        assert!((v - 0.5625).abs() < 1e-12);
        let (v, arg) = rate_oracle_argmax(2.0, &p).unwrap();
        assert!((arg - 0.5).abs() < 1e-9);
        assert!((v - 1.5).abs() < 1e-9);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = 1.0;
        let cases: [(f64, f64); 7] = [(0.3, 2.0), (0.9, 2.0), (-0.2, 0.5), (-0.6, -0.4), (-0.5, -1.0), (-0.3, -2.0), (-0.7, 0.0)];
        for &(a, d) in &cases {
            let e = 1e-6 * a.abs().max(1e-3);
            let fd_l = (l_of(a + e, d, b) - l_of(a - e, d, b)) / (2.0 * e);
            let fd_h = (h_of(a + e, d, b) - h_of(a - e, d, b)) / (2.0 * e);
            let (al, ah) = (l_prime(a, d, b), h_prime(a, d, b));
            assert!((fd_l - al).abs() <= 1e-6 * al.abs().max(1e-3), "L' a={a} d={d}");
            assert!((fd_h - ah).abs() <= 1e-6 * ah.abs().max(1e-3), "H' a={a} d={d}");
        }
    }

    #[test]
    fn saddle_at_zero_has_closed_form() {
        let p = params(1.0, 1.0);
        for &t in &[2.0, 10.0, 100.0] {
            let s = solve_saddle(0.0, t, &p).unwrap();
            assert!((s.a_t + 1.0 / t).abs() < 1e-12 / t + 1e-15, "T={t}: {}", s.a_t);
        }
    }

    #[test]
    fn saddle_rejects_other_regimes() {
        let p = params(1.0, 1.0);
        assert!(matches!(solve_saddle(-2.0, 10.0, &p), Err(Error::WrongRegime { .. })));
        assert!(matches!(solve_saddle(1.0, 10.0, &p), Err(Error::WrongRegime { .. })));
    }

    #[test]
    fn saddle_converges_to_boundary() {
        let p = params(1.0, 1.0);
        let s = solve_saddle(2.0, 1000.0, &p).unwrap();
        assert!(s.residual.abs() <= SADDLE_TOLERANCE);
        assert!((s.a_t - 1.0).abs() < 1e-2);
        assert!(s.a_t < 1.0);
    }

    #[test]
    fn first_order_examples() {
        assert!((first_order_coeff(2.0, &params(1.0, 1.0)).unwrap() - 2.0 / 75.0).abs() < 1e-15);
        assert_eq!(first_order_coeff(-1.0, &params(2.0, 1.0)).unwrap(), 3.0);
        assert!((first_order_coeff(0.5, &params(1.0, 1.0)).unwrap() + 1.0 / 9.0).abs() < 1e-15);
        assert!(first_order_coeff(-2.0, &params(1.0, 1.0)).is_err());
        assert!(first_order_coeff(0.0, &params(1.0, 1.0)).is_err());
    }
}
