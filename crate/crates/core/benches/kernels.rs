//! Sequential against rayon-parallel execution of the data-parallel kernels.
//!
//! `cargo bench -p weylsim` runs both policies; with
//! `--no-default-features` only the sequential one is available.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use weylsim::ensemble::{arcsine_quantile, rate_function, sample_h_ensemble, EmpiricalMeasure, McmcConfig};
use weylsim::exec::{self, ExecPolicy};
use weylsim::kmgr::{survival_kmgr, Kernel1D};
use weylsim::stochastic::{simulate_survival, McConfig};
use weylsim::{ChamberPoint, ChamberSpec, WeylType};

fn policies() -> Vec<(&'static str, ExecPolicy)> {
    let mut p = vec![("sequential", ExecPolicy::Sequential)];
    if exec::parallel_available() {
        p.push(("parallel", ExecPolicy::Parallel));
    }
    p
}

fn monte_carlo(c: &mut Criterion) {
    let spec = ChamberSpec::new(WeylType::A, 3, 1.0).unwrap();
    let x = ChamberPoint::new(spec, vec![-0.5, 0.0, 0.5]).unwrap();
    let mut cfg = McConfig::for_horizon(0.5, 1);
    cfg.paths = 16_384;
    cfg.dt = 2e-3;
    let mut g = c.benchmark_group("simulate_survival_A3");
    g.sample_size(10);
    for (name, p) in policies() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            exec::set_policy(p);
            b.iter(|| simulate_survival(&spec, black_box(0.5), &x, &cfg).unwrap())
        });
    }
    g.finish();
}

fn determinant_route(c: &mut Criterion) {
    let spec = ChamberSpec::new(WeylType::C, 3, 1.0).unwrap();
    let x = ChamberPoint::new(spec, vec![0.3, 0.7, 1.2]).unwrap();
    let kern = Kernel1D::with_defaults(1.0, 1.0).unwrap();
    let mut g = c.benchmark_group("survival_kmgr_C3");
    g.sample_size(10);
    for (name, p) in policies() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            exec::set_policy(p);
            b.iter(|| survival_kmgr(&spec, black_box(1.0), &x, &kern, 24).unwrap())
        });
    }
    g.finish();
}

fn ensemble(c: &mut Criterion) {
    let k = 400;
    let mu = EmpiricalMeasure::from_quantiles(WeylType::A, k, arcsine_quantile).unwrap();
    let mut g = c.benchmark_group("ensemble");
    g.sample_size(10);
    for (name, p) in policies() {
        g.bench_function(BenchmarkId::new("rate_function_k400", name), |b| {
            exec::set_policy(p);
            b.iter(|| rate_function(WeylType::A, black_box(&mu), 0.35).unwrap())
        });
        let cfg = McmcConfig::defaults(50, 1);
        g.bench_function(BenchmarkId::new("sample_h_ensemble_k50", name), |b| {
            exec::set_policy(p);
            b.iter(|| sample_h_ensemble(WeylType::A, 50, 16, black_box(&cfg)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, monte_carlo, determinant_route, ensemble);
criterion_main!(benches);
