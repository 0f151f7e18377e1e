//! Sequential against data-parallel execution of the two studies.

use criterion::{criterion_group, criterion_main, Criterion};

use netclear::experiments::{error_rate_study, runtime_study, ErrorRateConfig, Execution, Grid, RuntimeConfig};

fn error_config() -> ErrorRateConfig {
    ErrorRateConfig::standard_grid(vec![10], 10, 1)
}

fn runtime_config() -> RuntimeConfig {
    let mut cfg = RuntimeConfig::standard_grid(vec![10], 1, 2);
    cfg.grid = Grid {
        d_base_list: vec![1.5],
        ..cfg.grid
    };
    cfg
}

fn studies(c: &mut Criterion) {
    let modes = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

    let cfg = error_config();
    let mut group = c.benchmark_group("error_rate_study");
    group.sample_size(10);
    for (name, exec) in modes {
        group.bench_function(name, |b| b.iter(|| error_rate_study(&cfg, exec).unwrap()));
    }
    group.finish();

    let cfg = runtime_config();
    let mut group = c.benchmark_group("runtime_study");
    group.sample_size(10);
    for (name, exec) in modes {
        group.bench_function(name, |b| b.iter(|| runtime_study(&cfg, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, studies);
criterion_main!(benches);
