//! Sequential vs parallel execution of the per-path Monte Carlo loop.

use std::hint::black_box;

use cir_sldp::montecarlo::{estimate_tail, sample_stats, Execution, McConfig, Method};
use cir_sldp::simulate::Scheme;
use cir_sldp::ModelParams;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const EXECUTIONS: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn tail_estimators(c: &mut Criterion) {
    let p = ModelParams::explosive(1.0, 1.0, 6.0).unwrap();
    let mut group = c.benchmark_group("estimate_tail");
    group.sample_size(10);
    for method in [Method::Naive, Method::TiltedIs] {
        for (label, execution) in EXECUTIONS {
            let mut cfg = McConfig::new(2_000, method, 1);
            cfg.n_steps = Some(128);
            cfg.execution = execution;
            group.bench_with_input(BenchmarkId::new(format!("{method:?}"), label), &cfg, |bch, cfg| {
                bch.iter(|| estimate_tail(black_box(-2.0), &p, cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn path_statistics(c: &mut Criterion) {
    let p = ModelParams::explosive(1.0, 1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("sample_stats");
    group.sample_size(10);
    for scheme in [Scheme::ExactGrid, Scheme::FullTruncationEuler] {
        for (label, execution) in EXECUTIONS {
            group.bench_function(BenchmarkId::new(format!("{scheme:?}"), label), |bch| {
                bch.iter(|| sample_stats(&p, None, 5_000, 64, scheme, 1, execution).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, tail_estimators, path_statistics);
criterion_main!(benches);
