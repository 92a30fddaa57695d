use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use csma_core::{all_roots, partition_recursive, simulate, threshold_interval, SimConfig, Topology};

fn partition(c: &mut Criterion) {
    let mut group = c.benchmark_group("partition_recursive");
    for beta in [1usize, 8, 32] {
        group.bench_with_input(BenchmarkId::from_parameter(beta), &beta, |b, &beta| {
            b.iter(|| partition_recursive(beta, black_box(0.7), 2001).unwrap())
        });
    }
    group.finish();
}

fn roots(c: &mut Criterion) {
    let mut group = c.benchmark_group("all_roots");
    for (beta, sigma) in [(4usize, 0.01), (8, 1.0), (16, 100.0)] {
        group.bench_with_input(
            BenchmarkId::new(format!("beta{beta}"), sigma),
            &(beta, sigma),
            |b, &(beta, sigma)| b.iter(|| all_roots(beta, black_box(sigma)).unwrap()),
        );
    }
    group.finish();
}

fn threshold(c: &mut Criterion) {
    c.bench_function("threshold_interval/eta5", |b| {
        b.iter(|| threshold_interval(black_box(5)).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let top = Topology::wrapped_grid(4, 4, 1.0, 1.0).unwrap();
    let cfg = SimConfig::new(1.0, 1.0, 2.0, 2000.0, 1);
    c.bench_function("simulate/grid4x4_t2000", |b| {
        b.iter(|| simulate(&top, black_box(&cfg)).unwrap())
    });
}

criterion_group!(benches, partition, roots, threshold, simulation);
criterion_main!(benches);
