//! Trajectories of `dX = (δ + b X) dt + 2 √X dB` started at zero.
//!
//! Two schemes are provided. `ExactGrid` chains exact transitions: over a
//! step `h` the law of `X_{t+h}` given `X_t = x` is `c · χ'²_δ(x e^{bh} / c)`
//! with `c = (e^{bh} − 1)/b`, sampled as a Poisson-mixed Gamma so that
//! non-integer δ is exact. `FullTruncationEuler` is the positivity-robust
//! Euler variant: drift and diffusion see `max(X, 0)`, the emitted path is
//! clamped at zero.
//!
//! The time integral is always the trapezoidal sum of the emitted grid.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, SufficientStats};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[serde(rename = "exact")]
    ExactGrid,
    #[serde(rename = "euler")]
    FullTruncationEuler,
}

/// A discretized trajectory together with its sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stats: SufficientStats,
}

impl SamplePath {
    /// Writes `t,x` rows, one per grid point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x")?;
        for (t, x) in self.times.iter().zip(&self.values) {
            writeln!(w, "{t},{x}")?;
        }
        Ok(())
    }
}

/// `(e^{b t} − 1)/b`, with the `b → 0` limit `t`.
pub fn variance_scale(b: f64, t: f64) -> f64 {
    let bt = b * t;
    if bt.abs() < 1e-12 {
        t * (1.0 + 0.5 * bt)
    } else {
        bt.exp_m1() / b
    }
}

/// Chi-square with `dof` degrees of freedom and noncentrality `nc`.
pub fn sample_noncentral_chi_square<R: Rng + ?Sized>(dof: f64, nc: f64, rng: &mut R) -> f64 {
    let extra = if nc > 0.0 {
        let poisson = Poisson::new(0.5 * nc).expect("finite positive Poisson mean");
        poisson.sample(rng)
    } else {
        0.0
    };
    let gamma = Gamma::new(0.5 * dof + extra, 2.0).expect("positive Gamma shape");
    gamma.sample(rng)
}

/// Exact draw of `X_{t+dt}` given `X_t = x_from` under drift coefficient `b`.
pub fn transition_with<R: Rng + ?Sized>(x_from: f64, dt: f64, b: f64, delta: f64, rng: &mut R) -> f64 {
    let c = variance_scale(b, dt);
    let nc = x_from * (b * dt).exp() / c;
    c * sample_noncentral_chi_square(delta, nc, rng)
}

/// `X_T` from `X_0 = 0`: `L_T · χ²_δ` with `L_T = (e^{bT} − 1)/b`.
pub fn exact_endpoint(params: &ModelParams, stream: RngStream) -> f64 {
    let mut rng = stream.rng();
    exact_endpoint_with(params, &mut rng)
}

pub fn exact_endpoint_with<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> f64 {
    let scale = variance_scale(params.b, params.horizon);
    scale * sample_noncentral_chi_square(params.delta, 0.0, rng)
}

/// Exact conditional draw over `dt` under the parameters' drift.
pub fn exact_transition(x_from: f64, dt: f64, params: &ModelParams, stream: RngStream) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    if !(x_from >= 0.0) {
        return Err(Error::invalid("x_from", format!("must be >= 0, got {x_from}")));
    }
    let mut rng = stream.rng();
    Ok(transition_with(x_from, dt, params.b, params.delta, &mut rng))
}

/// Drift coefficient used on each step.
#[derive(Debug, Clone, Copy)]
pub enum DriftSchedule<'a> {
    Constant(f64),
    /// One coefficient per step, held constant within the step.
    PerStep(&'a [f64]),
}

impl DriftSchedule<'_> {
    #[inline]
    fn at(&self, k: usize) -> f64 {
        match self {
            DriftSchedule::Constant(b) => *b,
            DriftSchedule::PerStep(v) => v[k],
        }
    }
}

/// Walks one path on the uniform grid of `n_steps` steps over `[0, horizon]`.
///
/// `on_step(k, x_k, x_{k+1}, ∫_{t_k}^{t_{k+1}} X)` sees the emitted
/// (nonnegative) values. Returns the sufficient statistics.
pub(crate) fn drive<R, F>(
    delta: f64,
    horizon: f64,
    n_steps: usize,
    scheme: Scheme,
    drift: DriftSchedule<'_>,
    rng: &mut R,
    mut on_step: F,
) -> SufficientStats
where
    R: Rng + ?Sized,
    F: FnMut(usize, f64, f64, f64),
{
    let h = horizon / n_steps as f64;
    let sqrt_h = h.sqrt();
    let mut x = 0.0f64; // emitted value
    let mut state = 0.0f64; // unclamped Euler state
    let mut int_x = 0.0;
    for k in 0..n_steps {
        let b = drift.at(k);
        let next = match scheme {
            Scheme::ExactGrid => transition_with(x, h, b, delta, rng),
            Scheme::FullTruncationEuler => {
                let pos = state.max(0.0);
                let z: f64 = StandardNormal.sample(rng);
                state = state + (delta + b * pos) * h + 2.0 * pos.sqrt() * sqrt_h * z;
                state.max(0.0)
            }
        };
        let piece = 0.5 * h * (x + next);
        on_step(k, x, next, piece);
        int_x += piece;
        x = next;
    }
    SufficientStats { x_t: x, int_x }
}

fn check_steps(n_steps: usize) -> Result<()> {
    if n_steps < 2 {
        return Err(Error::invalid("n_steps", format!("must be >= 2, got {n_steps}")));
    }
    Ok(())
}

/// Simulates a full path under the nominal drift `params.b`, or under
/// `drift_override` when given.
pub fn simulate_path(
    params: &ModelParams,
    drift_override: Option<f64>,
    n_steps: usize,
    scheme: Scheme,
    stream: RngStream,
) -> Result<SamplePath> {
    check_steps(n_steps)?;
    let b = drift_override.unwrap_or(params.b);
    let mut rng = stream.rng();
    let h = params.horizon / n_steps as f64;
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(0.0);
    let stats = drive(
        params.delta,
        params.horizon,
        n_steps,
        scheme,
        DriftSchedule::Constant(b),
        &mut rng,
        |_, _, next, _| values.push(next),
    );
    let times = (0..=n_steps).map(|k| k as f64 * h).collect();
    Ok(SamplePath { times, values, stats })
}

/// Sufficient statistics only, without storing the path.
pub fn simulate_stats(
    params: &ModelParams,
    drift_override: Option<f64>,
    n_steps: usize,
    scheme: Scheme,
    stream: RngStream,
) -> Result<SufficientStats> {
    check_steps(n_steps)?;
    let b = drift_override.unwrap_or(params.b);
    let mut rng = stream.rng();
    Ok(drive(
        params.delta,
        params.horizon,
        n_steps,
        scheme,
        DriftSchedule::Constant(b),
        &mut rng,
        |_, _, _, _| {},
    ))
}

/// Full-truncation Euler path driven by caller-supplied standard normals.
pub fn euler_path_from_normals<I>(
    params: &ModelParams,
    drift_override: Option<f64>,
    n_steps: usize,
    normals: I,
) -> Result<SamplePath>
where
    I: IntoIterator<Item = f64>,
{
    check_steps(n_steps)?;
    let b = drift_override.unwrap_or(params.b);
    let h = params.horizon / n_steps as f64;
    let mut normals = normals.into_iter();
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(0.0);
    let mut state = 0.0f64;
    let mut int_x = 0.0;
    for _ in 0..n_steps {
        let z = normals
            .next()
            .ok_or_else(|| Error::invalid("normals", "fewer normals than steps"))?;
        let pos = state.max(0.0);
        state = state + (params.delta + b * pos) * h + 2.0 * pos.sqrt() * h.sqrt() * z;
        let next = state.max(0.0);
        int_x += 0.5 * h * (values.last().unwrap() + next);
        values.push(next);
    }
    let times = (0..=n_steps).map(|k| k as f64 * h).collect();
    Ok(SamplePath {
        times,
        values,
        stats: SufficientStats {
            x_t: state.max(0.0),
            int_x,
        },
    })
}
