use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use querynash::harness::{generate_game, Generator};
use querynash::*;

fn game(kind: Generator, k: usize) -> BimatrixGame {
    generate_game(&kind, k, 42).unwrap().0
}

fn mwu(c: &mut Criterion) {
    let mut group = c.benchmark_group("mwu_zero_sum");
    group.sample_size(10);
    for k in [10, 50] {
        let g = game(Generator::ZeroSum, k);
        let config = MwuConfig::new(k, 0.2, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(k), &g, |b, g| {
            b.iter(|| mwu_zero_sum(&mut MatrixOracle::new(g.clone()), black_box(&config)).unwrap())
        });
    }
    group.finish();
}

fn estimation(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_payoff_vector");
    group.sample_size(10);
    for k in [50, 200] {
        let g = game(Generator::Uniform, k);
        let y = MixedProfile::uniform(k).y;
        group.bench_with_input(BenchmarkId::from_parameter(k), &g, |b, g| {
            b.iter(|| estimate_payoff_vector(&mut MatrixOracle::new(g.clone()), &y, Player::Row, 0.1, 7).unwrap())
        });
    }
    group.finish();
}

fn bbm(c: &mut Criterion) {
    let mut group = c.benchmark_group("bbm_query_ne");
    group.sample_size(10);
    for k in [10, 30] {
        let g = game(Generator::Uniform, k);
        group.bench_with_input(BenchmarkId::from_parameter(k), &g, |b, g| {
            b.iter(|| bbm_query_ne(&mut MatrixOracle::new(g.clone()), 0.2, 3).unwrap())
        });
    }
    group.finish();
}

fn verifier(c: &mut Criterion) {
    let g = game(Generator::Uniform, 200);
    let p = MixedProfile::uniform(200);
    c.bench_function("exact_regret/200", |b| b.iter(|| exact_regret(black_box(&g), black_box(&p)).unwrap()));
}

criterion_group!(benches, mwu, estimation, bbm, verifier);
criterion_main!(benches);
