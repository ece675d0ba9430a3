use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use subspace_bench::{dense_fixture, sparse_fixture};
use subspace_core::densify::{householder_apply_binary, CompactDense};
use subspace_core::projections::{apply_operator, gaussian_rp_matrix, rs_sample_indices, sparse_rp_matrix};
use subspace_core::{seed, ProjectionOperator, SrpScaling};

const D: usize = 2500;
const N: usize = 1000;

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    for k in [5usize, 100, 600] {
        group.bench_with_input(BenchmarkId::new("rs", k), &k, |b, &k| {
            let mut rng = seed::rng(1);
            b.iter(|| rs_sample_indices(D, k, &mut rng).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("srp", k), &k, |b, &k| {
            let mut rng = seed::rng(2);
            b.iter(|| sparse_rp_matrix(D, k, SrpScaling::Paper, &mut rng).unwrap());
        });
    }
    group.sample_size(10);
    group.bench_function("rp_orthonormal/100", |b| {
        let mut rng = seed::rng(3);
        b.iter(|| gaussian_rp_matrix(D, 100, true, &mut rng).unwrap());
    });
    group.finish();
}

fn apply(c: &mut Criterion) {
    let x = dense_fixture(N, D);
    let mut rng = seed::rng(4);
    let k = 100;
    let rs = ProjectionOperator::rs(rs_sample_indices(D, k, &mut rng).unwrap());
    let rp = gaussian_rp_matrix(D, k, true, &mut rng).unwrap();
    let srp = sparse_rp_matrix(D, k, SrpScaling::Paper, &mut rng).unwrap();

    let mut group = c.benchmark_group("apply_dense_k100");
    group.throughput(Throughput::Elements(N as u64));
    group.sample_size(20);
    for (name, op) in [("rs", &rs), ("rp", &rp), ("srp", &srp)] {
        group.bench_function(name, |b| b.iter(|| apply_operator(op, black_box(&x), true).unwrap()));
    }
    group.finish();
}

fn householder(c: &mut Criterion) {
    let x = sparse_fixture(N, D, 0.1);
    let subset = rs_sample_indices(D, 100, &mut seed::rng(5)).unwrap();
    let rs = ProjectionOperator::rs(subset.clone());

    let mut group = c.benchmark_group("sparse_density_0.1_k100");
    group.throughput(Throughput::Elements(N as u64));
    group.bench_function("rs", |b| b.iter(|| apply_operator(&rs, black_box(&x), true).unwrap()));
    group.bench_function("householder_then_rs", |b| {
        b.iter(|| {
            let compact = CompactDense {
                d: D,
                rows: x.rows().map(|r| householder_apply_binary(r, D)).collect(),
            };
            compact.rs_project(&subset, true).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, build, apply, householder);
criterion_main!(benches);
