use chaosqec::config::RunConfig;
use chaosqec::exec::Execution;
use chaosqec::harness::run_simulation_with;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn config(n_spins: usize) -> RunConfig {
    let mut cfg = RunConfig::default();
    for (k, v) in [
        ("lattice.n_spins", n_spins.to_string()),
        ("disorder.j2", "0.5".into()),
        ("code.name", "ideal".into()),
        ("code.max_errors", "1".into()),
        ("run.n_times", "11".into()),
        ("run.realizations", "16".into()),
    ] {
        cfg.set(k, &v).expect("bench config");
    }
    cfg
}

fn ensemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    for n in [6, 8] {
        let cfg = config(n);
        for (label, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(label, n), &cfg, |b, cfg| {
                b.iter(|| run_simulation_with(cfg, exec).expect("simulation"))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, ensemble);
criterion_main!(benches);
