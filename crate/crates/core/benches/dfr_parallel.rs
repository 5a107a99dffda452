//! Compares the rayon-parallel operator against the sequential fallback,
//! and the operator against the nested baselines at small scale.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dfq::baselines::{nested_join_dfr, nested_join_dfr_indexed, FlatTable};
use dfq::dfr::{directly_follows, directly_follows_sequential};
use dfq::ingestion::{gen_merge_cases, synth_base_log};

fn bench_parallel_vs_sequential(c: &mut Criterion) {
    let mut group = c.benchmark_group("directly_follows");
    for &cases in &[100u64, 1000, 5000] {
        let log = synth_base_log(42, cases, 30, 20);
        group.bench_with_input(BenchmarkId::new("parallel", cases), &log, |b, log| {
            b.iter(|| directly_follows(log))
        });
        group.bench_with_input(BenchmarkId::new("sequential", cases), &log, |b, log| {
            b.iter(|| directly_follows_sequential(log))
        });
    }
    group.finish();
}

fn bench_against_baselines(c: &mut Criterion) {
    let mut group = c.benchmark_group("approaches_single_trace");
    group.sample_size(10);
    let base = synth_base_log(7, 1, 10, 50);
    for &k in &[4u64, 8] {
        let log = gen_merge_cases(&base, k);
        let events = log.event_count();
        group.bench_with_input(BenchmarkId::new("native", events), &log, |b, log| {
            b.iter(|| directly_follows(log))
        });
        let mut table = FlatTable::from_log(&log);
        group.bench_with_input(BenchmarkId::new("nested", events), &table, |b, t| {
            b.iter(|| nested_join_dfr(t))
        });
        table.build_index();
        group.bench_with_input(BenchmarkId::new("nested_indexed", events), &table, |b, t| {
            b.iter(|| nested_join_dfr_indexed(t).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_parallel_vs_sequential, bench_against_baselines);
criterion_main!(benches);
