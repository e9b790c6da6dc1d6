use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use l1sketch::harness::seed::stream;
use l1sketch::{
    derive_rng, gv_construct, nn_recover, run_protocol_trials, sample_l1_ball, L1Ball, ProtocolConfig, TopKOracle,
};
use l1sketch_bench::{codebook, orthonormal_matrix};

fn bench_gv(c: &mut Criterion) {
    let mut group = c.benchmark_group("gv_construct");
    group.sample_size(10);
    for (q, k) in [(16u32, 4usize), (8, 8), (64, 3)] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("q{q}_k{k}")), &(q, k), |b, &(q, k)| {
            b.iter(|| gv_construct(black_box(q), black_box(k), 0.5).unwrap())
        });
    }
    group.finish();
}

fn bench_nn_recover(c: &mut Criterion) {
    let book = codebook(16, 4);
    let a = orthonormal_matrix(10, book.n(), 1);
    let y = a.apply(&book.dense_f64(17)).unwrap();
    c.bench_function("nn_recover_q16_k4_m10", |b| b.iter(|| nn_recover(&a, black_box(&y), &book).unwrap()));
}

fn bench_sampler(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_l1_ball");
    for n in [64usize, 1024, 16384] {
        let ball = L1Ball::new(n, 1.0).unwrap();
        let mut rng = derive_rng(2, 0, stream::NOISE);
        group.bench_with_input(BenchmarkId::from_parameter(n), &ball, |b, ball| {
            b.iter(|| sample_l1_ball(ball, &mut rng))
        });
    }
    group.finish();
}

fn bench_protocol(c: &mut Criterion) {
    let config = ProtocolConfig::with_gv_codebook(64, 4, 1.0).unwrap();
    let oracle = TopKOracle { k: 4 };
    let mut group = c.benchmark_group("protocol");
    group.sample_size(10);
    group.bench_function("trial_n64_k4", |b| {
        b.iter(|| run_protocol_trials(&config, &oracle, 64, 1, black_box(3)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_gv, bench_nn_recover, bench_sampler, bench_protocol);
criterion_main!(benches);
