//! Parallel-vs-sequential throughput of the data-parallel kernels.
//!
//! Each workload runs once on the default rayon pool and once inside a
//! single-thread pool, which is the same code path the `parallel` feature's
//! sequential fallback takes item by item. Run with `cargo bench`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use rand::Rng;
use rand_distr::StandardNormal;

use latentlens::curation::{jackknife_entropy, knn_entropy, weighted_diversity_sample};
use latentlens::editing::{fit_boundary, FitOptions};
use latentlens::metrics::{per_expression_report, EvalPair, MaskSource, Raster};
use latentlens::rng::seeded_rng;
use latentlens::types::{LatentRecord, Layout, StyleCode};
use latentlens::LatentArchive;

fn gaussian_archive(n: usize, d: usize, seed: u64) -> LatentArchive {
    let layout = Layout::new(vec![d]).unwrap();
    let mut rng = seeded_rng(seed);
    let records = (0..n)
        .map(|i| {
            let flat: Vec<f64> = (0..d)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            LatentRecord::new(
                format!("r{i:05}"),
                StyleCode::from_flat(&layout, &flat).unwrap(),
            )
        })
        .collect();
    LatentArchive::new(layout, records).unwrap()
}

fn pools() -> [(&'static str, rayon::ThreadPool); 2] {
    let sequential = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let parallel = rayon::ThreadPoolBuilder::new().build().unwrap();
    [("seq", sequential), ("par", parallel)]
}

fn bench_entropy(c: &mut Criterion) {
    let mut rng = seeded_rng(1);
    let points: Vec<Vec<f64>> = (0..2000)
        .map(|_| {
            (0..8)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let mut group = c.benchmark_group("knn_entropy_n2000_d8");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| knn_entropy(black_box(&points), 3).unwrap()))
        });
    }
    group.finish();
}

fn bench_jackknife(c: &mut Criterion) {
    let mut rng = seeded_rng(2);
    let points: Vec<Vec<f64>> = (0..400)
        .map(|_| {
            (0..8)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let mut group = c.benchmark_group("jackknife_entropy_n400_g100");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| jackknife_entropy(black_box(&points), 3, 100, 7).unwrap()))
        });
    }
    group.finish();
}

fn bench_sampler(c: &mut Criterion) {
    // sequential by design: draws depend on one another
    let archive = gaussian_archive(20_000, 64, 3);
    let mut group = c.benchmark_group("weighted_sample_256_of_20000x64");
    group.sample_size(20);
    group.bench_function("draws", |b| {
        b.iter(|| weighted_diversity_sample(black_box(&archive), 256, 11, 2.0).unwrap())
    });
    group.finish();
}

fn bench_boundary_fit(c: &mut Criterion) {
    let mut rng = seeded_rng(4);
    let layout = Layout::new(vec![512]).unwrap();
    let mut class = |shift: f64| -> Vec<StyleCode> {
        (0..1000)
            .map(|_| {
                let flat: Vec<f64> = (0..512)
                    .map(|i| {
                        let z: f64 = rng.sample(StandardNormal);
                        if i == 0 {
                            z + shift
                        } else {
                            z
                        }
                    })
                    .collect();
                StyleCode::from_flat(&layout, &flat).unwrap()
            })
            .collect()
    };
    let positives = class(2.0);
    let negatives = class(0.0);
    let options = FitOptions {
        l2_reg: 1.0,
        ..FitOptions::default()
    };
    // single-threaded deterministic optimizer
    let mut group = c.benchmark_group("fit_boundary_2000x512");
    group.sample_size(10);
    group.bench_function("gd", |b| {
        b.iter(|| {
            fit_boundary(
                "bench",
                black_box(&positives),
                black_box(&negatives),
                &options,
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_report(c: &mut Criterion) {
    let mut rng = seeded_rng(6);
    let mut pairs = Vec::new();
    for expression in ["Blink", "Scream", "Yawn", "Coo"] {
        for i in 0..20 {
            let id = format!("{expression}-{i}");
            let noise = |rng: &mut rand_chacha::ChaCha8Rng| {
                Raster::new(
                    128,
                    128,
                    1,
                    (0..128 * 128).map(|_| rng.random::<f64>()).collect(),
                )
                .unwrap()
            };
            let reference = noise(&mut rng);
            for method in ["a", "b"] {
                pairs.push(EvalPair {
                    id: id.clone(),
                    expression: expression.to_string(),
                    method: method.to_string(),
                    img: noise(&mut rng),
                    reference: reference.clone(),
                });
            }
        }
    }
    let mut group = c.benchmark_group("per_expression_report_160x128x128");
    group.sample_size(20);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                pool.install(|| {
                    per_expression_report(black_box(&pairs), "a", "b", &MaskSource::Default)
                        .unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_entropy,
    bench_jackknife,
    bench_report,
    bench_sampler,
    bench_boundary_fit
);
criterion_main!(benches);
