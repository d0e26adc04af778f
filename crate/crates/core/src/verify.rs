//! Self-check suite: each check compares an implementation against an
//! independent oracle and reports pass/fail with a one-line detail.

use serde::Serialize;

use crate::cgf::{cgf_total, girsanov_log_density, riccati_oracle, tilt_interval};
use crate::error::Result;
use crate::montecarlo::{endpoint_tail_at_zero, map_indexed, sample_stats, Execution};
use crate::params::ModelParams;
use crate::rate::{rate_function, rate_oracle};
use crate::rng::RngStream;
use crate::simulate::{transition_with, Scheme};
use crate::sldp::exact_tail_at_zero;
use crate::stats::{ks_two_sample, mean_stderr};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub delta: f64,
    pub b: f64,
    pub seed: u64,
    pub n_paths: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { delta: 1.0, b: 1.0, seed: 20240601, n_paths: 100_000 }
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Closed-form CGF vs. Riccati integration on λ-grids inside the domain.
///
/// The error is taken relative to `max(|L_T(λ)|, δ|λ|)`: the ODE integrates
/// `δ∫ψ/T = L_T(λ) + δλ`, and `L_T` itself has a second root inside the
/// domain where a plain relative error is meaningless.
pub fn cgf_vs_riccati(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for &d in &[-2.0 * cfg.b, -0.5 * cfg.b, 0.5 * cfg.b, 2.0 * cfg.b] {
        for &t in &[1.0 / cfg.b, 5.0 / cfg.b] {
            let p = ModelParams::explosive(cfg.delta, cfg.b, t)?;
            let (lo, hi) = tilt_interval(d, &p).expect("d ≠ b");
            let lo = if lo.is_finite() { lo } else { hi - cfg.b };
            for k in 1..10 {
                let lambda = lo + (hi - lo) * k as f64 / 10.0;
                let closed = cgf_total(lambda, d, &p)?;
                let ode = riccati_oracle(lambda, d, &p)?;
                worst = worst.max((closed - ode).abs() / closed.abs().max(cfg.delta * lambda.abs()));
            }
        }
    }
    Ok(check("cgf_vs_riccati", worst < 1e-6, format!("max rel diff {worst:.2e}")))
}

/// `E_β[dP_b/dP_β] = 1` by simulation under β. Horizon `1/b` and proposals
/// `β ∈ {b/2, b/4, 0}` keep the weights' second moment finite.
pub fn girsanov_normalization(cfg: &VerifyConfig) -> Result<CheckResult> {
    let p = ModelParams::explosive(cfg.delta, cfg.b, 1.0 / cfg.b)?;
    let mut worst = 0.0f64;
    for &beta in &[0.5 * cfg.b, 0.25 * cfg.b, 0.0] {
        let stats = sample_stats(&p, Some(beta), cfg.n_paths / 4, 256, Scheme::ExactGrid, cfg.seed, Execution::default())?;
        let w: Vec<f64> = stats.iter().map(|s| girsanov_log_density(s, cfg.b, beta, &p).exp()).collect();
        let (m, se) = mean_stderr(&w);
        worst = worst.max((m - 1.0).abs() / se);
    }
    Ok(check("girsanov_normalization", worst < 3.0, format!("max |mean − 1|/stderr {worst:.2}")))
}

/// Closed-form rate vs. numerical maximization of the limiting CGF.
pub fn rate_vs_legendre(cfg: &VerifyConfig) -> Result<CheckResult> {
    let p = ModelParams::explosive(cfg.delta, cfg.b, 1.0)?;
    let mut worst = 0.0f64;
    for i in 0..=80 {
        let d = -4.0 * cfg.b + 8.0 * cfg.b * i as f64 / 80.0;
        if (d - cfg.b).abs() < 0.01 * cfg.b {
            continue;
        }
        worst = worst.max((rate_function(d, &p)?.rate - rate_oracle(d, &p)?).abs());
    }
    Ok(check("rate_vs_legendre", worst <= 1e-6, format!("max abs diff {worst:.2e}")))
}

/// Two exact transitions over `dt` vs. one over `2 dt`, two-sample KS.
pub fn chapman_kolmogorov(cfg: &VerifyConfig) -> Result<CheckResult> {
    let (x0, dt) = (1.5, 0.4);
    let (b, delta) = (cfg.b, cfg.delta);
    let n = cfg.n_paths;
    let two = map_indexed(n, Execution::default(), |i| {
        let mut rng = RngStream::new(cfg.seed, i as u64).rng();
        let mid = transition_with(x0, dt, b, delta, &mut rng);
        transition_with(mid, dt, b, delta, &mut rng)
    });
    let seed = RngStream::derive_seed(cfg.seed, 1);
    let one = map_indexed(n, Execution::default(), |i| {
        let mut rng = RngStream::new(seed, i as u64).rng();
        transition_with(x0, 2.0 * dt, b, delta, &mut rng)
    });
    let ks = ks_two_sample(&two, &one, 1e-3);
    Ok(check(
        "chapman_kolmogorov",
        ks.passed,
        format!("KS {:.4} vs critical {:.4}", ks.statistic, ks.critical),
    ))
}

/// Exact chi-square tail at d = 0 vs. endpoint indicator frequency.
pub fn exact_vs_mc_at_zero(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for &t in &[2.0 / cfg.b, 5.0 / cfg.b] {
        let p = ModelParams::explosive(cfg.delta, cfg.b, t)?;
        let exact = exact_tail_at_zero(t, &p)?;
        let mc = endpoint_tail_at_zero(&p, cfg.n_paths, cfg.seed, Execution::default());
        worst = worst.max((mc.mean - exact).abs() / mc.stderr);
    }
    Ok(check("exact_vs_mc_at_zero", worst < 3.0, format!("max |mc − exact|/stderr {worst:.2}")))
}

pub fn run_suite(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    Ok(vec![
        cgf_vs_riccati(cfg)?,
        girsanov_normalization(cfg)?,
        rate_vs_legendre(cfg)?,
        chapman_kolmogorov(cfg)?,
        exact_vs_mc_at_zero(cfg)?,
    ])
}
