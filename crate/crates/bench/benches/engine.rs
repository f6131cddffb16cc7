use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use confcoh::{build_generators, enumerate_basis, make_cpm, CeComplex, Engine, Mode};

fn bench_enumerate(c: &mut Criterion) {
    let g = build_generators(&make_cpm(3).unwrap()).unwrap();
    let mut group = c.benchmark_group("enumerate_basis/cp3");
    for k in [6u32, 10, 14] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| enumerate_basis(&g, black_box(k)))
        });
    }
    group.finish();
}

fn bench_largest_rank(c: &mut Criterion) {
    let g = build_generators(&make_cpm(3).unwrap()).unwrap();
    let complex = CeComplex::build(&g, 12, false).unwrap();
    let block = complex
        .blocks
        .values()
        .max_by_key(|b| b.matrix.n_rows() * b.matrix.n_cols())
        .unwrap();
    c.bench_function("rank/cp3_k12_largest_block", |b| {
        b.iter(|| black_box(&block.matrix).rank())
    });
}

fn bench_betti(c: &mut Criterion) {
    let mut group = c.benchmark_group("betti");
    group.sample_size(10);
    for (m, k, mode) in [
        (2u32, 10u32, Mode::Full),
        (2, 10, Mode::Reduced),
        (3, 10, Mode::Full),
    ] {
        let id = format!("cp{m}_k{k}_{mode}");
        group.bench_function(id, |b| {
            b.iter(|| Engine::cpm(m).unwrap().betti(black_box(k), mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_enumerate, bench_largest_rank, bench_betti);
criterion_main!(benches);
