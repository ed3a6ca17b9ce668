//! Engine throughput, one worker vs the default rayon pool.
//!
//! `cargo bench -p jaccard-core` compares the two pools; with
//! `--no-default-features` every loop is sequential and the "threads"
//! dimension collapses to the plain-iterator fallback.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use jaccard_core::fdr::Pi0Method;
use jaccard_core::matrix::PresenceAbsenceMatrix;
use jaccard_core::pairs::all_pairs_test;
use jaccard_core::rng::stream_rng;
use jaccard_core::simulate::simulate_null_pair;
use jaccard_core::{run_test, BinaryVector, Engine, EngineConfig};

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = rayon::current_num_threads();
    let mut sizes = vec![1];
    // on a single-core host this still shows the pool overhead
    if jaccard_core::is_parallel() {
        sizes.push(default.max(2));
    }
    sizes
        .into_iter()
        .map(|n| (format!("{n}-thread"), rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()))
        .collect()
}

fn null_pair(m: usize) -> (BinaryVector, BinaryVector) {
    simulate_null_pair(m, 0.5, 0.4, &mut stream_rng(1, 0)).unwrap()
}

fn single_pair(c: &mut Criterion) {
    let (a, b) = null_pair(300);
    let mut group = c.benchmark_group("single-pair-m300");
    group.sample_size(20);
    for (name, pool) in pools() {
        for engine in Engine::ALL {
            let cfg = EngineConfig::new(engine);
            group.bench_function(BenchmarkId::new(engine.name(), &name), |bench| {
                pool.install(|| bench.iter(|| black_box(run_test(&a, &b, &cfg, 0).unwrap())))
            });
        }
    }
    group.finish();
}

fn all_pairs(c: &mut Criterion) {
    let rows: Vec<BinaryVector> = (0..30)
        .map(|k| simulate_null_pair(80, 0.45, 0.45, &mut stream_rng(2, k)).unwrap().0)
        .collect();
    let matrix = PresenceAbsenceMatrix::from_rows(rows).unwrap();
    let mut group = c.benchmark_group("all-pairs-30x80");
    group.sample_size(10);
    for (name, pool) in pools() {
        for engine in [Engine::Asymptotic, Engine::Mca, Engine::Bootstrap] {
            let cfg = EngineConfig::new(engine);
            group.bench_function(BenchmarkId::new(engine.name(), &name), |bench| {
                pool.install(|| bench.iter(|| black_box(all_pairs_test(&matrix, &cfg, Pi0Method::default()).unwrap())))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, single_pair, all_pairs);
criterion_main!(benches);
