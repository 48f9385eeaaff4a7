//! Compares the sequential and rayon-backed execution of the batch-style
//! workloads: oracle enumeration and the ratio harness.

use criterion::{criterion_group, criterion_main, Criterion};

use cmp_core::batch::{ratio_batch, seeded_specs, Problem};
use cmp_core::instance::generate_euclidean;
use cmp_core::oracle::{exact_cmp, Execution, OracleBudget};

fn bench_exact_cmp(c: &mut Criterion) {
    let inst = generate_euclidean(9, 3, 0.6, 42).unwrap();
    let budget = OracleBudget::default();
    let mut group = c.benchmark_group("exact_cmp_n9_k3");
    group.bench_function("sequential", |b| {
        b.iter(|| exact_cmp(&inst, &budget, Execution::Sequential).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| exact_cmp(&inst, &budget, Execution::Parallel).unwrap())
    });
    group.finish();
}

fn bench_ratio_batch(c: &mut Criterion) {
    let specs = seeded_specs(16, &[7, 8], &[1, 2], None, 77);
    let budget = OracleBudget::default();
    let mut group = c.benchmark_group("ratio_batch_16");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| ratio_batch(Problem::Cmp, &specs, &budget, Execution::Sequential).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| ratio_batch(Problem::Cmp, &specs, &budget, Execution::Parallel).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_exact_cmp, bench_ratio_batch);
criterion_main!(benches);
