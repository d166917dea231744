#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensornorm::structure::admissible_indices;
use tensornorm::tensor::all_indices;
use tensornorm::{is_weakly_irreducible, PVector, ReducedTupleVector, SparseTensor, TupleVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn experiment_tensor() -> SparseTensor {
    SparseTensor::from_one_based(
        vec![2, 3, 4],
        vec![
            (vec![1, 2, 1], 806.0),
            (vec![1, 3, 1], 761.0),
            (vec![1, 3, 4], 3.0),
            (vec![2, 1, 1], 833.0),
            (vec![2, 2, 2], 285.0),
            (vec![2, 3, 3], 176.0),
        ],
    )
    .unwrap()
}

/// `f_{111} = f_{222} = 1`.
pub fn diagonal_tensor() -> SparseTensor {
    SparseTensor::from_one_based(
        vec![2, 2, 2],
        vec![(vec![1, 1, 1], 1.0), (vec![2, 2, 2], 1.0)],
    )
    .unwrap()
}

/// `f_{111} = f_{121} = f_{222} = 1`: weakly irreducible but not irreducible.
pub fn reducible_tensor() -> SparseTensor {
    SparseTensor::from_one_based(
        vec![2, 2, 2],
        vec![
            (vec![1, 1, 1], 1.0),
            (vec![1, 2, 1], 1.0),
            (vec![2, 2, 2], 1.0),
        ],
    )
    .unwrap()
}

/// All ones except `f_{122} = f_{212} = 0`.
pub fn asymmetric_tensor() -> SparseTensor {
    let entries = all_indices(&[2, 2, 2])
        .into_iter()
        .filter(|i| i != &vec![0, 1, 1] && i != &vec![1, 0, 1])
        .map(|i| (i, 1.0));
    SparseTensor::new(vec![2, 2, 2], entries).unwrap()
}

pub fn skew_matrix() -> SparseTensor {
    SparseTensor::from_one_based(vec![2, 2], vec![(vec![1, 2], 1.0), (vec![2, 1], -1.0)]).unwrap()
}

/// Random nonnegative tensor with roughly `density` of its cells filled.
pub fn random_tensor(rng: &mut ChaCha8Rng, dims: &[usize], density: f64) -> SparseTensor {
    let entries: Vec<_> = all_indices(dims)
        .into_iter()
        .filter_map(|i| (rng.gen::<f64>() < density).then(|| (i, rng.gen_range(0.01..1.0))))
        .collect();
    SparseTensor::new(dims.to_vec(), entries).unwrap()
}

/// Random weakly irreducible nonnegative tensor with the given order and
/// dimensions in `2..=max_dim`.
pub fn random_weakly_irreducible(
    rng: &mut ChaCha8Rng,
    order: usize,
    max_dim: usize,
) -> SparseTensor {
    loop {
        let dims: Vec<usize> = (0..order).map(|_| rng.gen_range(2..=max_dim)).collect();
        let density = rng.gen_range(0.3..1.0);
        let f = random_tensor(rng, &dims, density);
        if !f.is_zero() && is_weakly_irreducible(&f).unwrap() {
            return f;
        }
    }
}

/// Random exponents in `(1.2, 8)` with at least one admissible mode.
pub fn random_admissible_p(rng: &mut ChaCha8Rng, order: usize) -> PVector {
    loop {
        let p = PVector::new((0..order).map(|_| rng.gen_range(1.2..8.0)).collect()).unwrap();
        if !admissible_indices(&p).is_empty() {
            return p;
        }
    }
}

pub fn random_positive_reduced(
    rng: &mut ChaCha8Rng,
    dims: &[usize],
    omitted: usize,
    p: &PVector,
) -> ReducedTupleVector {
    let parts = (0..dims.len())
        .filter(|&k| k != omitted)
        .map(|k| {
            unit(
                (0..dims[k]).map(|_| rng.gen_range(0.01..1.0)).collect(),
                p.get(k),
            )
        })
        .collect();
    ReducedTupleVector::new(omitted, parts).unwrap()
}

pub fn random_tuple(rng: &mut ChaCha8Rng, dims: &[usize], lo: f64, hi: f64) -> TupleVector {
    TupleVector::new(
        dims.iter()
            .map(|&d| (0..d).map(|_| rng.gen_range(lo..hi)).collect())
            .collect(),
    )
}

pub fn unit(v: Vec<f64>, p: f64) -> Vec<f64> {
    let n = tensornorm::p_norm(&v, p);
    v.into_iter().map(|x| x / n).collect()
}

/// Fully symmetric nonnegative `d^m` tensor: one random value per multiset.
pub fn random_symmetric(rng: &mut ChaCha8Rng, d: usize, m: usize) -> SparseTensor {
    let mut values = std::collections::BTreeMap::new();
    let entries: Vec<_> = all_indices(&vec![d; m])
        .into_iter()
        .map(|idx| {
            let mut key = idx.clone();
            key.sort_unstable();
            let v = *values
                .entry(key)
                .or_insert_with(|| rng.gen_range(0.01..1.0));
            (idx, v)
        })
        .collect();
    SparseTensor::new(vec![d; m], entries).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
