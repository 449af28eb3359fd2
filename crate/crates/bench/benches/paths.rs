use std::hint::black_box;

use bubbleflow::{BubbleModel, ModelParams, NetworkSpec};
use criterion::{criterion_group, criterion_main, Criterion};

fn single_path(c: &mut Criterion) {
    let params = ModelParams::default();
    let mut group = c.benchmark_group("path");
    group.sample_size(10);
    for spec in [NetworkSpec::SF22, NetworkSpec::ER32] {
        let dist = spec.build(params.nodes).unwrap();
        let model = BubbleModel::new(params.clone(), dist).unwrap();
        group.bench_function(spec.label(), |b| {
            b.iter(|| black_box(model.simulate_path(black_box(0)).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, single_path);
criterion_main!(benches);
