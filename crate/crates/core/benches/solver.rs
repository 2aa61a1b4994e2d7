use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sepekr::compression::lemma_sweep;
use sepekr::report::{run_grid, Grid};
use sepekr::{extremal_classes, max_intersecting, Parallelism, SearchConfig};

fn modes() -> [(&'static str, Parallelism); 2] {
    [
        ("sequential", Parallelism::SEQUENTIAL),
        ("parallel", Parallelism::default()),
    ]
}

fn config(par: Parallelism) -> SearchConfig {
    SearchConfig {
        parallelism: par,
        ..SearchConfig::default()
    }
}

fn bench_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("max_intersecting");
    for (n, r, k) in [(14, 4, 1), (15, 3, 2), (16, 2, 3)] {
        for (name, par) in modes() {
            let cfg = config(par);
            group.bench_with_input(
                BenchmarkId::new(name, format!("{n}-{r}-{k}")),
                &cfg,
                |b, cfg| b.iter(|| max_intersecting(black_box(n), r, k, cfg).unwrap()),
            );
        }
    }
    group.finish();

    let mut group = c.benchmark_group("extremal_classes");
    for (n, r, k) in [(10, 4, 1), (12, 4, 1)] {
        for (name, par) in modes() {
            let cfg = config(par);
            group.bench_with_input(
                BenchmarkId::new(name, format!("{n}-{r}-{k}")),
                &cfg,
                |b, cfg| b.iter(|| extremal_classes(black_box(n), r, k, cfg).unwrap()),
            );
        }
    }
    group.finish();
}

fn bench_lemmas(c: &mut Criterion) {
    let mut group = c.benchmark_group("lemma_sweep");
    group.sample_size(20);
    for (name, par) in modes() {
        group.bench_function(BenchmarkId::new(name, "12-3-1x200"), |b| {
            b.iter(|| lemma_sweep(black_box(12), 3, 1, 200, 1, par).unwrap())
        });
    }
    group.finish();
}

fn bench_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("default_grid");
    group.sample_size(10);
    let grid = Grid::default_grid();
    for (name, par) in modes() {
        let cfg = config(par);
        group.bench_function(name, |b| b.iter(|| run_grid(&grid, &cfg, false).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_search, bench_lemmas, bench_grid);
criterion_main!(benches);
