use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mbcast_core::backbone::{bounded_diameter_cds, brute_force_mcds, greedy_cds};
use mbcast_core::generate::{gen_random_udg, gen_ring_fixture};

fn greedy(c: &mut Criterion) {
    let mut group = c.benchmark_group("greedy_cds");
    for n in [20, 50, 100] {
        let g = gen_random_udg(n, 3.0, 10.0, 1, 1000).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| greedy_cds(black_box(g)))
        });
    }
    group.finish();
}

fn bounded(c: &mut Criterion) {
    let mut group = c.benchmark_group("bounded_diameter_cds");
    for size in [33, 129] {
        let g = gen_ring_fixture(size).unwrap();
        let base = greedy_cds(&g).unwrap();
        group.bench_with_input(BenchmarkId::new("ring", size), &(g, base), |b, (g, base)| {
            b.iter(|| bounded_diameter_cds(black_box(g), black_box(base)))
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let g = gen_random_udg(12, 4.0, 10.0, 7, 1000).unwrap();
    c.bench_function("brute_force_mcds/12", |b| b.iter(|| brute_force_mcds(black_box(&g))));
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = greedy, bounded, oracle
);
criterion_main!(benches);
