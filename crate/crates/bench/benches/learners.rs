use std::hint::black_box;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use featscale::harness::{self, Benchmark, Protocol};
use featscale::{Hyperparams, Learner, Manifest, Method, OnlineLearner, RunningStats, Variant};

fn heart() -> Benchmark {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/manifest.toml");
    let manifest = Manifest::from_file(path).expect("bundled manifest");
    Benchmark::from_manifest(&manifest, "heart", 0, false).expect("heart loads")
}

fn running_stats(c: &mut Criterion) {
    let b = heart();
    c.bench_function("running_stats/heart_pass", |bench| {
        bench.iter(|| {
            let mut st = RunningStats::new(b.train.feature_count());
            for inst in &b.train {
                st.update(&inst.features).unwrap();
            }
            black_box(st)
        })
    });
}

fn learn_one(c: &mut Criterion) {
    let b = heart();
    let inst = &b.train.instances()[0];
    let h = Hyperparams {
        lambda: 0.1,
        mu: 0.1,
        nu: 0.1,
        n_train: b.train.len(),
        ..Hyperparams::default()
    };
    let mut group = c.benchmark_group("learn_one");
    for v in Variant::ALL {
        for averaged in [false, true] {
            let method = Method::new(v, averaged);
            let learner = Learner::new(method, b.train.feature_count(), h).unwrap();
            group.bench_function(BenchmarkId::from_parameter(method), |bench| {
                bench.iter_batched_ref(
                    || learner.clone(),
                    |l| l.learn_one(black_box(inst)).unwrap(),
                    criterion::BatchSize::SmallInput,
                )
            });
        }
    }
    group.finish();
}

fn one_pass(c: &mut Criterion) {
    let b = heart();
    let mut group = c.benchmark_group("one_pass_heart");
    for name in ["SGD", "GN", "FS", "FS-2+avg", "PA-1"] {
        let method: Method = name.parse().unwrap();
        group.bench_function(name, |bench| {
            bench.iter(|| harness::train_model(method, &b.train, Hyperparams::default()).unwrap())
        });
    }
    group.finish();
}

fn grid(c: &mut Criterion) {
    let b = heart();
    let protocol = Protocol::default();
    let mut group = c.benchmark_group("grid_search_heart");
    group.sample_size(10);
    for name in ["GN", "FS"] {
        let method: Method = name.parse().unwrap();
        group.bench_function(name, |bench| {
            bench.iter(|| harness::grid_search(method, &b.train, &protocol, 0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, running_stats, learn_one, one_pass, grid);
criterion_main!(benches);
