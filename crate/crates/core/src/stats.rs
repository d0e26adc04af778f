//! Small sample-statistics helpers used by the Monte Carlo checks.

use rand::Rng;
use serde::Serialize;

use crate::rng::RngStream;

/// Sample mean and standard error of the mean (unbiased variance).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}

/// `log(mean(exp(x)))`, shifted by the maximum.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = values.iter().map(|v| (v - m).exp()).sum();
    m + (s / values.len() as f64).ln()
}

/// Bootstrap standard error of `statistic` over `n_boot` resamples.
pub fn bootstrap_stderr<F>(values: &[f64], n_boot: usize, seed: u64, statistic: F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let n = values.len();
    let mut buf = vec![0.0; n];
    let reps: Vec<f64> = (0..n_boot)
        .map(|r| {
            let mut rng = RngStream::new(seed, r as u64).rng();
            for slot in buf.iter_mut() {
                *slot = values[rng.random_range(0..n)];
            }
            statistic(&buf)
        })
        .collect();
    mean_stderr(&reps).1 * (n_boot as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical: f64,
    pub passed: bool,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic critical value
/// `c(α) √((n + m)/(n m))`, `c(α) = √(−ln(α/2)/2)`.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> KsResult {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut stat = 0.0f64;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        stat = stat.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let (nf, mf) = (n as f64, m as f64);
    let critical = (-(0.5 * alpha).ln() / 2.0).sqrt() * ((nf + mf) / (nf * mf)).sqrt();
    KsResult {
        statistic: stat,
        critical,
        passed: stat <= critical,
    }
}
