use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use otfs_bench::{grid, info_frame};
use otfs_core::precoder::brute_force_precode;
use otfs_core::{GreedyConfig, GreedyPrecoder};

fn greedy(c: &mut Criterion) {
    let mut group = c.benchmark_group("greedy");
    group.sample_size(20);
    for (m, n) in [(16, 16), (16, 64), (64, 16)] {
        let precoder = GreedyPrecoder::new(grid(m, n));
        let u = info_frame(m, n, 4, 0);
        for (label, cfg) in [
            ("cap5", GreedyConfig::default()),
            ("converged", GreedyConfig::until_converged()),
        ] {
            group.bench_with_input(BenchmarkId::new(label, format!("{m}x{n}")), &u, |b, u| {
                b.iter(|| precoder.precode(u, &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn exhaustive(c: &mut Criterion) {
    let p = grid(4, 3);
    let u = info_frame(4, 3, 2, 0);
    c.bench_function("brute_force/4x3", |b| {
        b.iter(|| brute_force_precode(&u, &p).unwrap())
    });
}

criterion_group!(benches, greedy, exhaustive);
criterion_main!(benches);
