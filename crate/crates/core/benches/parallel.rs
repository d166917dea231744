use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
use tensornorm::oracle::oracle_norm_with;
use tensornorm::{cw_bounds_batch, Execution, PVector, ReducedTupleVector, SparseTensor};

fn random_tensor(dims: &[usize], seed: u64) -> SparseTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = tensornorm::tensor::all_indices(dims)
        .into_iter()
        .map(|i| (i, rng.gen_range(0.1..1.0)));
    SparseTensor::new(dims.to_vec(), entries).unwrap()
}

fn random_points(dims: &[usize], n: usize, seed: u64) -> Vec<ReducedTupleVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let parts = dims[1..]
                .iter()
                .map(|&d| (0..d).map(|_| rng.gen_range(0.05..1.0)).collect())
                .collect();
            ReducedTupleVector::new(0, parts).unwrap()
        })
        .collect()
}

fn modes() -> [(&'static str, Execution); 2] {
    [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ]
}

fn oracle_restarts(c: &mut Criterion) {
    let dims = [4, 5, 6];
    let f = random_tensor(&dims, 1);
    let p = PVector::uniform(3, 3.0).unwrap();
    let mut group = c.benchmark_group("oracle_restarts");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::new(name, 64), &exec, |b, &exec| {
            b.iter(|| oracle_norm_with(black_box(&f), &p, 64, 7, exec).unwrap())
        });
    }
    group.finish();
}

fn bracket_sweep(c: &mut Criterion) {
    let dims = [8, 8, 8];
    let f = random_tensor(&dims, 2);
    let p = PVector::uniform(3, 3.0).unwrap();
    let points = random_points(&dims, 2000, 3);
    let mut group = c.benchmark_group("bracket_sweep");
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::new(name, points.len()), &exec, |b, &exec| {
            b.iter(|| cw_bounds_batch(black_box(&f), &p, &points, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, oracle_restarts, bracket_sweep);
criterion_main!(benches);
