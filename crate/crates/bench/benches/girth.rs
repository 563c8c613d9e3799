use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use sanov_core::girth::{component_size, girth_bfs, margulis_genset, DEFAULT_BUDGET};
use sanov_core::lattice::sl2_ball_count;
use sanov_core::{build_genset, enum_omega, CayleySpec, Prime};

fn forge(c: &mut Criterion) {
    let mut group = c.benchmark_group("forge");
    for r in [4u64, 8, 16] {
        group.bench_with_input(BenchmarkId::new("enum_omega", r), &r, |b, &r| {
            b.iter(|| enum_omega(black_box(r)))
        });
        group.bench_with_input(BenchmarkId::new("build_genset", r), &r, |b, &r| {
            b.iter(|| build_genset(black_box(r)))
        });
    }
    group.finish();
}

fn girth(c: &mut Criterion) {
    let mut group = c.benchmark_group("girth");
    group.sample_size(10);
    let w2 = build_genset(2).unwrap();
    for p in [149u64, 151] {
        let spec = CayleySpec::from_genset(&w2, Prime::new(p).unwrap()).unwrap();
        group.bench_with_input(BenchmarkId::new("bfs_r2", p), &spec, |b, s| {
            b.iter(|| girth_bfs(s))
        });
    }
    for p in [31u64, 61] {
        let spec = CayleySpec::from_genset(&margulis_genset(), Prime::new(p).unwrap()).unwrap();
        group.bench_with_input(BenchmarkId::new("bfs_margulis", p), &spec, |b, s| {
            b.iter(|| girth_bfs(s))
        });
        group.bench_with_input(BenchmarkId::new("component_margulis", p), &spec, |b, s| {
            b.iter(|| component_size(s, DEFAULT_BUDGET))
        });
    }
    group.finish();
}

fn lattice(c: &mut Criterion) {
    let mut group = c.benchmark_group("lattice");
    for r in [100u64, 400] {
        group.bench_with_input(BenchmarkId::new("sl2_ball_count", r), &r, |b, &r| {
            b.iter(|| sl2_ball_count(black_box(r)))
        });
    }
    group.finish();
}

criterion_group!(benches, forge, girth, lattice);
criterion_main!(benches);
