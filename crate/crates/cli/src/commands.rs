use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use cir_sldp::cgf::{decompose_cgf, tilt_interval};
use cir_sldp::montecarlo::{compare_report, sample_stats, Execution, McConfig};
use cir_sldp::params::mle_drift;
use cir_sldp::rate::rate_function;
use cir_sldp::sldp::tail_approx;
use cir_sldp::verify::{run_suite, VerifyConfig};
use cir_sldp::{simulate_path, RngStream};

use crate::config::{Command, Format, RunConfig};
use crate::CliError;

pub struct Output {
    pub text: String,
    /// Set when the output is complete but the run must still fail
    /// (e.g. a failed verify check).
    pub failure: Option<CliError>,
    /// Diagnostics for stderr that do not change the exit status.
    pub warnings: Vec<String>,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, failure: None, warnings: Vec::new() }
    }
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn config_json(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

/// CSV with `#` comment lines: an optional timestamp, then the config echo.
fn csv(cfg: &RunConfig, header: &str, rows: &[String]) -> String {
    let mut s = String::new();
    if !cfg.no_timestamp {
        let _ = writeln!(s, "# generated_unix={}", timestamp());
    }
    let _ = writeln!(s, "# config={}", config_json(cfg));
    let _ = writeln!(s, "{header}");
    for r in rows {
        let _ = writeln!(s, "{r}");
    }
    s
}

fn json_doc<T: Serialize>(cfg: &RunConfig, key: &str, payload: &T) -> String {
    let mut doc = serde_json::Map::new();
    if !cfg.no_timestamp {
        doc.insert("generated_unix".into(), json!(timestamp()));
    }
    doc.insert("config".into(), config_json(cfg));
    doc.insert(key.into(), serde_json::to_value(payload).expect("payload serializes"));
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json");
    s.push('\n');
    s
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn require_thresholds(cfg: &RunConfig, what: &str) -> Result<Vec<f64>, CliError> {
    let ds = cfg.thresholds()?;
    if ds.is_empty() {
        return Err(CliError::Validation(format!("{what} needs --d or --d-grid")));
    }
    Ok(ds)
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    match cmd {
        Command::Simulate => simulate(cfg),
        Command::Mle => mle(cfg),
        Command::Rate => rate(cfg),
        Command::Cgf => cgf(cfg),
        Command::TailApprox => tail(cfg),
        Command::McTail => mc_tail(cfg),
        Command::Verify => verify(cfg),
    }
}

fn simulate(cfg: &RunConfig) -> Result<Output, CliError> {
    #[derive(Serialize)]
    struct PathRecord {
        #[serde(rename = "T")]
        horizon: f64,
        path: usize,
        times: Vec<f64>,
        values: Vec<f64>,
        x_t: f64,
        int_x: f64,
    }
    let mut records = Vec::new();
    for t in cfg.horizons()? {
        let params = cfg.params(t)?;
        let n_steps = cfg.n_steps.unwrap_or_else(|| cir_sldp::montecarlo::default_steps(t));
        for i in 0..cfg.n_paths {
            let p = simulate_path(&params, None, n_steps, cfg.scheme(), RngStream::new(cfg.seed, i as u64))?;
            records.push(PathRecord {
                horizon: t,
                path: i,
                x_t: p.stats.x_t,
                int_x: p.stats.int_x,
                times: p.times,
                values: p.values,
            });
        }
    }
    Ok(Output::ok(match cfg.format {
        Format::Json => json_doc(cfg, "paths", &records),
        Format::Csv => {
            let rows: Vec<String> = records
                .iter()
                .flat_map(|r| {
                    r.times
                        .iter()
                        .zip(&r.values)
                        .map(move |(t, x)| format!("{},{},{t},{x}", r.horizon, r.path))
                })
                .collect();
            csv(cfg, "T,path,t,x", &rows)
        }
    }))
}

fn mle(cfg: &RunConfig) -> Result<Output, CliError> {
    #[derive(Serialize)]
    struct Row {
        #[serde(rename = "T")]
        horizon: f64,
        path: usize,
        x_t: f64,
        int_x: f64,
        b_hat: Option<f64>,
    }
    let mut rows = Vec::new();
    for t in cfg.horizons()? {
        let params = cfg.params(t)?;
        let n_steps = cfg.n_steps.unwrap_or_else(|| cir_sldp::montecarlo::default_steps(t));
        let stats = sample_stats(&params, None, cfg.n_paths, n_steps, cfg.scheme(), cfg.seed, Execution::default())?;
        for (i, s) in stats.iter().enumerate() {
            rows.push(Row {
                horizon: t,
                path: i,
                x_t: s.x_t,
                int_x: s.int_x,
                b_hat: mle_drift(s, &params).ok(),
            });
        }
    }
    Ok(Output::ok(match cfg.format {
        Format::Json => json_doc(cfg, "rows", &rows),
        Format::Csv => {
            let lines: Vec<String> = rows
                .iter()
                .map(|r| format!("{},{},{},{},{}", r.horizon, r.path, r.x_t, r.int_x, fmt_opt(r.b_hat)))
                .collect();
            csv(cfg, "T,path,x_t,int_x,b_hat", &lines)
        }
    }))
}

fn rate(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = cfg.params(1.0)?;
    let points = require_thresholds(cfg, "rate")?
        .into_iter()
        .map(|d| rate_function(d, &params))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Output::ok(match cfg.format {
        Format::Json => json_doc(cfg, "rows", &points),
        Format::Csv => {
            let lines: Vec<String> = points
                .iter()
                .map(|p| format!("{},{},{},{}", p.d, p.rate, p.a_d, p.boundary))
                .collect();
            csv(cfg, "d,rate,a_d,boundary", &lines)
        }
    }))
}

fn cgf(cfg: &RunConfig) -> Result<Output, CliError> {
    let ds = require_thresholds(cfg, "cgf")?;
    let ts = cfg.horizons()?;
    if ds.len() != 1 || ts.len() != 1 {
        return Err(CliError::Validation("cgf takes a single --d and a single --T".into()));
    }
    let (d, t) = (ds[0], ts[0]);
    let params = cfg.params(t)?;
    let lambdas = match cfg.lambdas()? {
        Some(l) => l,
        None => {
            let (lo, hi) = tilt_interval(d, &params).ok_or_else(|| {
                CliError::Validation(format!("the tilt domain is empty at d = b = {}", params.b))
            })?;
            let lo = if lo.is_finite() { lo } else { hi - params.b };
            (1..=21).map(|k| lo + (hi - lo) * k as f64 / 22.0).collect()
        }
    };
    let rows = lambdas
        .iter()
        .map(|&l| decompose_cgf(l, d, &params))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Output::ok(match cfg.format {
        Format::Json => json_doc(cfg, "rows", &rows),
        Format::Csv => {
            let lines: Vec<String> = rows
                .iter()
                .map(|c| format!("{},{},{},{},{}", c.tilt.lambda, c.l_val, c.h_val, c.r_val, c.total))
                .collect();
            csv(cfg, "lambda,L,H,R,total", &lines)
        }
    }))
}

fn tail(cfg: &RunConfig) -> Result<Output, CliError> {
    let ds = require_thresholds(cfg, "tail-approx")?;
    let mut rows = Vec::new();
    for t in cfg.horizons()? {
        let params = cfg.params(t)?;
        for &d in &ds {
            if ds.len() > 1 && d == params.b {
                continue; // no tail at the true drift; skipped inside grids
            }
            rows.push(tail_approx(d, t, &params, cfg.order)?);
        }
    }
    Ok(Output::ok(match cfg.format {
        Format::Json => json_doc(cfg, "rows", &rows),
        Format::Csv => {
            let lines: Vec<String> = rows
                .iter()
                .map(|a| {
                    format!(
                        "{},{},{},{},{},{},{}",
                        a.regime.label(),
                        a.d,
                        a.horizon,
                        a.order_p,
                        a.log_value,
                        a.value,
                        a.valid
                    )
                })
                .collect();
            csv(cfg, "regime,d,T,order,log_value,value,valid", &lines)
        }
    }))
}

fn mc_tail(cfg: &RunConfig) -> Result<Output, CliError> {
    let ds = require_thresholds(cfg, "mc-tail")?;
    let mc = McConfig {
        n_paths: cfg.n_paths,
        n_steps: cfg.n_steps,
        scheme: cfg.scheme(),
        method: cfg.method(),
        seed: cfg.seed,
        execution: Execution::default(),
    };
    let mut reports = Vec::new();
    for t in cfg.horizons()? {
        let params = cfg.params(t)?;
        for &d in &ds {
            if ds.len() > 1 && d == params.b {
                continue;
            }
            reports.push(compare_report(d, t, &params, cfg.order, &mc)?);
        }
    }
    let warnings = reports
        .iter()
        .filter_map(|r| r.mc.warning.as_ref().map(|w| format!("warning (d = {}, T = {}): {w}", r.d, r.horizon)))
        .collect();
    let text = match cfg.format {
        Format::Json => json_doc(cfg, "reports", &reports),
        Format::Csv => {
            let lines: Vec<String> = reports
                .iter()
                .map(|r| {
                    format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                        r.approx.regime.label(),
                        r.d,
                        r.horizon,
                        r.order_p,
                        r.n_steps,
                        r.approx.value,
                        r.approx.valid,
                        fmt_opt(r.exact),
                        r.mc.mean,
                        r.mc.stderr,
                        r.mc.n_hits,
                        r.mc.n_degenerate,
                        r.ratio_mc_over_approx
                    )
                })
                .collect();
            csv(
                cfg,
                "regime,d,T,order,n_steps,approx,approx_valid,exact,mc_mean,mc_stderr,n_hits,n_degenerate,ratio",
                &lines,
            )
        }
    };
    Ok(Output { text, failure: None, warnings })
}

fn verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let vc = VerifyConfig {
        delta: cfg.delta,
        b: cfg.b,
        seed: cfg.seed,
        n_paths: cfg.n_paths,
    };
    let checks = run_suite(&vc)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    let text = match cfg.format {
        Format::Json => json_doc(cfg, "checks", &checks),
        Format::Csv => {
            let lines: Vec<String> = checks
                .iter()
                .map(|c| format!("{},{},\"{}\"", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail))
                .collect();
            csv(cfg, "check,status,detail", &lines)
        }
    };
    let failure = (!failed.is_empty()).then(|| CliError::Numerical(format!("checks failed: {}", failed.join(", "))));
    Ok(Output { text, failure, warnings: Vec::new() })
}
