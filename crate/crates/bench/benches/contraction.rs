use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tensorquad::boundary::{boundary_contract_banded, boundary_contract_rows};
use tensorquad::integrands::recursion_integral;
use tensorquad::{contract_exact, TruncationSpec};
use tensorquad_bench::{densified_band, replicated_rows, small_general_network};

fn bench_boundary_rows(c: &mut Criterion) {
    let (_, rows) = replicated_rows();
    let mut group = c.benchmark_group("boundary_rows");
    group.sample_size(20);
    for max_chi in [6usize, 64] {
        let spec = TruncationSpec::new(max_chi, 0.0).unwrap();
        group.bench_function(format!("chi{max_chi}"), |b| {
            b.iter(|| boundary_contract_rows(black_box(&rows), &spec).unwrap())
        });
    }
    group.finish();
}

fn bench_boundary_banded(c: &mut Criterion) {
    let tn = densified_band();
    let mut group = c.benchmark_group("boundary_banded");
    group.sample_size(10);
    for max_chi in [8usize, 16] {
        let spec = TruncationSpec::new(max_chi, 0.0).unwrap();
        group.bench_function(format!("chi{max_chi}"), |b| {
            b.iter(|| boundary_contract_banded(black_box(&tn), &spec).unwrap())
        });
    }
    group.finish();
}

fn bench_greedy_exact(c: &mut Criterion) {
    let tn = small_general_network();
    let mut group = c.benchmark_group("greedy_exact");
    group.sample_size(20);
    group.bench_function("n5_k4_g5", |b| {
        b.iter(|| contract_exact(black_box(&tn)).unwrap())
    });
    group.finish();
}

fn bench_recursion(c: &mut Criterion) {
    let (spec, _) = replicated_rows();
    c.bench_function("recursion_integral", |b| {
        b.iter(|| recursion_integral(black_box(&spec)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_boundary_rows,
    bench_boundary_banded,
    bench_greedy_exact,
    bench_recursion
);
criterion_main!(benches);
