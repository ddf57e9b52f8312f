use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use screenlab::bench::{run_plan, BenchPlan};
use screenlab::datagen::{DictionaryKind, GenSpec};
use screenlab::{ProblemKind, Strategy};

fn plan(parallel: bool) -> BenchPlan {
    BenchPlan {
        lambda_ratios: vec![0.5, 0.7, 0.9],
        strategies: vec![Strategy::None, Strategy::Dynamic],
        seeds: (0..8).collect(),
        parallel,
        ..BenchPlan::new(ProblemKind::Lasso, GenSpec::new(DictionaryKind::Pnoise, 100, 500, 0))
    }
}

fn batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("fista_batch_pnoise_100x500");
    group.sample_size(10);
    for parallel in [false, true] {
        let p = plan(parallel);
        let label = if parallel { "rayon" } else { "sequential" };
        group.bench_with_input(BenchmarkId::from_parameter(label), &p, |b, p| {
            b.iter(|| black_box(run_plan(p).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
