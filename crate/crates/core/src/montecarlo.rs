//! Monte Carlo estimates of the MLE tail probabilities.
//!
//! Three estimators:
//!
//! - `Naive`: indicator average under the nominal drift.
//! - `DriftIs`: paths under a constant proposal drift β ([`is_drift`]),
//!   weighted by the Girsanov likelihood ratio.
//! - `TiltedIs`: paths under the exponentially tilted law `∝ exp(λ S_T(d)) dP`.
//!   That law is a square-root diffusion with time-varying drift
//!   `b + 4ψ(T − t)`, ψ the Riccati solution; the drift is held constant on
//!   each grid step and the weight is the step-wise Girsanov product, so the
//!   estimator is unbiased for the discretized event.
//!
//! Every path `i` draws from its own stream `(seed, i)`. Per-path outcomes
//! are collected in index order and reduced sequentially, so results are
//! bit-identical for any worker count and for sequential execution.

use serde::{Deserialize, Serialize};

use crate::cgf::{girsanov_log_density, riccati_profile};
use crate::error::{Error, Result};
use crate::params::{classify_regime, sufficient_stat_s, ModelParams, Regime, SufficientStats};
use crate::rate::solve_saddle;
use crate::rng::RngStream;
use crate::simulate::{drive, exact_endpoint_with, DriftSchedule, Scheme};
use crate::sldp::{exact_tail_at_zero, tail_approx, TailApprox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Naive,
    DriftIs,
    TiltedIs,
}

/// How the per-path map is executed. `Parallel` falls back to sequential
/// when the crate is built without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `0..n` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Caps the global worker pool. Only the first call has an effect.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) -> bool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_ok()
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) -> bool {
    false
}

/// `max(512, ⌈64 T⌉)`.
pub fn default_steps(horizon: f64) -> usize {
    ((64.0 * horizon).ceil() as usize).max(512)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    /// `None` uses [`default_steps`].
    pub n_steps: Option<usize>,
    pub scheme: Scheme,
    pub method: Method,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl McConfig {
    pub fn new(n_paths: usize, method: Method, seed: u64) -> Self {
        Self {
            n_paths,
            n_steps: None,
            scheme: Scheme::ExactGrid,
            method,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn steps_for(&self, horizon: f64) -> usize {
        self.n_steps.unwrap_or_else(|| default_steps(horizon))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub n_hits: usize,
    pub n_degenerate: usize,
    pub warning: Option<String>,
    pub method: Method,
}

impl MCEstimate {
    pub fn relative_stderr(&self) -> f64 {
        self.stderr / self.mean
    }
}

/// Constant proposal drift for `DriftIs`:
/// d < −b → d; d > b → −(2d − b); −b ≤ d < b → −b; d = b → b.
pub fn is_drift(d: f64, params: &ModelParams) -> f64 {
    let b = params.b;
    if d < -b {
        d
    } else if d > b {
        -(2.0 * d - b)
    } else if d == b {
        b
    } else {
        -b
    }
}

/// Tilt λ used by `TiltedIs`: `a_d/2` for d < −b, the finite-horizon
/// saddle `a_T/2` otherwise.
pub fn tilt_for(d: f64, params: &ModelParams) -> Result<f64> {
    match classify_regime(d, params)? {
        Regime::BelowMinusB => {
            let b = params.b;
            Ok((d * d - b * b) / (8.0 * d))
        }
        Regime::TruthPoint => Ok(0.0),
        _ => Ok(0.5 * solve_saddle(d, params.horizon, params)?.a_t),
    }
}

#[derive(Debug, Clone, Copy)]
struct PathOutcome {
    weight: f64,
    hit: bool,
    degenerate: bool,
}

fn event(stats: &SufficientStats, d: f64, params: &ModelParams, upper: bool) -> bool {
    let s = sufficient_stat_s(stats, d, params);
    if upper {
        s >= 0.0
    } else {
        s <= 0.0
    }
}

/// Estimates `P(b̂ ≥ d)` for d > b and `P(b̂ ≤ d)` otherwise, at horizon
/// `params.horizon`.
pub fn estimate_tail(d: f64, params: &ModelParams, cfg: &McConfig) -> Result<MCEstimate> {
    if cfg.n_paths < 100 {
        return Err(Error::invalid("n_paths", format!("must be >= 100, got {}", cfg.n_paths)));
    }
    let n_steps = cfg.steps_for(params.horizon);
    if n_steps < 2 {
        return Err(Error::invalid("n_steps", format!("must be >= 2, got {n_steps}")));
    }
    let upper = classify_regime(d, params)?.is_upper_tail();
    let (delta, b, horizon) = (params.delta, params.b, params.horizon);
    let h = horizon / n_steps as f64;

    let drifts: Vec<f64> = match cfg.method {
        Method::Naive => vec![b],
        Method::DriftIs => vec![is_drift(d, params)],
        Method::TiltedIs => {
            let lambda = tilt_for(d, params)?;
            riccati_profile(lambda, d, params, n_steps)?
                .into_iter()
                .map(|psi| b + 4.0 * psi)
                .collect()
        }
    };

    let one_path = |i: usize| -> PathOutcome {
        let mut rng = RngStream::new(cfg.seed, i as u64).rng();
        let schedule = if drifts.len() == 1 {
            DriftSchedule::Constant(drifts[0])
        } else {
            DriftSchedule::PerStep(&drifts)
        };
        let mut log_w = 0.0;
        let stats = drive(delta, horizon, n_steps, cfg.scheme, schedule, &mut rng, |k, x0, x1, piece| {
            if cfg.method == Method::TiltedIs {
                let bk = drifts[k];
                log_w += 0.25 * (b - bk) * (x1 - x0 - delta * h) - 0.125 * (b * b - bk * bk) * piece;
            }
        });
        if stats.is_degenerate() {
            return PathOutcome { weight: 0.0, hit: false, degenerate: true };
        }
        let hit = event(&stats, d, params, upper);
        let weight = if !hit {
            0.0
        } else {
            match cfg.method {
                Method::Naive => 1.0,
                Method::DriftIs => girsanov_log_density(&stats, b, drifts[0], params).exp(),
                Method::TiltedIs => log_w.exp(),
            }
        };
        PathOutcome { weight, hit, degenerate: false }
    };

    let outcomes = map_indexed(cfg.n_paths, cfg.execution, one_path);
    Ok(reduce(&outcomes, cfg.method))
}

fn reduce(outcomes: &[PathOutcome], method: Method) -> MCEstimate {
    let n_paths = outcomes.len();
    let n_degenerate = outcomes.iter().filter(|o| o.degenerate).count();
    let n_hits = outcomes.iter().filter(|o| o.hit).count();
    let used = (n_paths - n_degenerate) as f64;
    let (mut mean, mut stderr) = (0.0, 0.0);
    if used >= 2.0 {
        mean = outcomes.iter().filter(|o| !o.degenerate).map(|o| o.weight).sum::<f64>() / used;
        let ss: f64 = outcomes
            .iter()
            .filter(|o| !o.degenerate)
            .map(|o| (o.weight - mean) * (o.weight - mean))
            .sum();
        stderr = (ss / (used - 1.0) / used).sqrt();
    }
    let warning = (n_degenerate * 100 > n_paths).then(|| {
        format!("{n_degenerate} of {n_paths} paths degenerate (zero integral); excluded")
    });
    MCEstimate { mean, stderr, n_paths, n_hits, n_degenerate, warning, method }
}

/// Sufficient statistics of `n_paths` paths under drift `drift`
/// (`params.b` when `None`), in stream order.
pub fn sample_stats(
    params: &ModelParams,
    drift: Option<f64>,
    n_paths: usize,
    n_steps: usize,
    scheme: Scheme,
    seed: u64,
    execution: Execution,
) -> Result<Vec<SufficientStats>> {
    if n_steps < 2 {
        return Err(Error::invalid("n_steps", format!("must be >= 2, got {n_steps}")));
    }
    let b = drift.unwrap_or(params.b);
    Ok(map_indexed(n_paths, execution, |i| {
        let mut rng = RngStream::new(seed, i as u64).rng();
        drive(params.delta, params.horizon, n_steps, scheme, DriftSchedule::Constant(b), &mut rng, |_, _, _, _| {})
    }))
}

/// `P(X_T ≤ δT)` — i.e. `P(b̂ ≤ 0)` — from exact endpoint draws.
pub fn endpoint_tail_at_zero(params: &ModelParams, n_paths: usize, seed: u64, execution: Execution) -> MCEstimate {
    let threshold = params.delta * params.horizon;
    let outcomes = map_indexed(n_paths, execution, |i| {
        let mut rng = RngStream::new(seed, i as u64).rng();
        let hit = exact_endpoint_with(params, &mut rng) <= threshold;
        PathOutcome { weight: if hit { 1.0 } else { 0.0 }, hit, degenerate: false }
    });
    reduce(&outcomes, Method::Naive)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub params: ModelParams,
    pub d: f64,
    pub horizon: f64,
    pub order_p: u32,
    pub config: McConfig,
    pub n_steps: usize,
    pub approx: TailApprox,
    /// Exact value, populated only for d = 0.
    pub exact: Option<f64>,
    pub mc: MCEstimate,
    pub ratio_mc_over_approx: f64,
}

/// Closed-form approximation, exact value (d = 0) and Monte Carlo estimate
/// at horizon `horizon`.
pub fn compare_report(
    d: f64,
    horizon: f64,
    params: &ModelParams,
    order_p: u32,
    cfg: &McConfig,
) -> Result<TailReport> {
    let params = params.with_horizon(horizon)?;
    let approx = tail_approx(d, horizon, &params, order_p)?;
    let exact = if d == 0.0 { Some(exact_tail_at_zero(horizon, &params)?) } else { None };
    let mc = estimate_tail(d, &params, cfg)?;
    let ratio_mc_over_approx = mc.mean / approx.value;
    Ok(TailReport {
        params,
        d,
        horizon,
        order_p,
        config: *cfg,
        n_steps: cfg.steps_for(horizon),
        approx,
        exact,
        mc,
        ratio_mc_over_approx,
    })
}
