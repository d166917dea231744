//! Brute-force reference values for small problems.
//!
//! Nothing here calls into the sparse kernels or the spectral maps: the
//! tensor is copied into a dense array and every contraction is redone from
//! scratch, so agreement with the solvers is a real cross-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::spectral::{PVector, SingularPair};
use crate::tensor::{SparseTensor, TupleVector};

/// Largest total dimension `sum_k d_k` the oracle accepts.
pub const DIMENSION_GUARD: usize = 64;
pub const DEFAULT_RESTARTS: usize = 100;
/// Relative improvement of the quotient below which a restart stops.
pub const STAGNATION: f64 = 1e-13;
const MAX_SWEEPS: usize = 200_000;

struct Dense {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl Dense {
    fn from_sparse(f: &SparseTensor) -> Self {
        let dims = f.dims().to_vec();
        let len: usize = dims.iter().product();
        let mut values = vec![0.0; len];
        for (idx, v) in f.entries() {
            let mut flat = 0;
            for (k, &j) in idx.iter().enumerate() {
                flat = flat * dims[k] + j;
            }
            values[flat] = v;
        }
        Dense { dims, values }
    }

    /// Contraction with every part except mode `skip`; `None` contracts all.
    fn contract(&self, x: &[Vec<f64>], skip: Option<usize>) -> Vec<f64> {
        let m = self.dims.len();
        let mut out = vec![0.0; skip.map_or(1, |i| self.dims[i])];
        let mut idx = vec![0usize; m];
        for &v in &self.values {
            if v != 0.0 {
                let mut prod = v;
                for k in 0..m {
                    if Some(k) != skip {
                        prod *= x[k][idx[k]];
                    }
                }
                out[skip.map_or(0, |i| idx[i])] += prod;
            }
            for k in (0..m).rev() {
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        out
    }
}

fn lp_norm(v: &[f64], p: f64) -> f64 {
    v.iter().map(|t| t.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn unit(v: Vec<f64>, p: f64) -> Vec<f64> {
    let n = lp_norm(&v, p);
    v.into_iter().map(|t| t / n).collect()
}

/// Alternating ascent from one start; returns `(|f(x)|, x)` with unit parts.
fn ascend(dense: &Dense, p: &[f64], mut x: Vec<Vec<f64>>) -> (f64, Vec<Vec<f64>>) {
    for (k, part) in x.iter_mut().enumerate() {
        *part = unit(std::mem::take(part), p[k]);
    }
    let mut q = dense.contract(&x, None)[0];
    for _ in 0..MAX_SWEEPS {
        for i in 0..x.len() {
            let sign = if q < 0.0 { -1.0 } else { 1.0 };
            let g = dense.contract(&x, Some(i));
            let e = 1.0 / (p[i] - 1.0);
            let y: Vec<f64> = g
                .iter()
                .map(|&t| (sign * t).abs().powf(e).copysign(sign * t))
                .collect();
            if y.iter().all(|&t| t == 0.0) {
                continue;
            }
            x[i] = unit(y, p[i]);
        }
        let next = dense.contract(&x, None)[0];
        let done = next.abs() - q.abs() <= STAGNATION * next.abs();
        q = next;
        if done {
            break;
        }
    }
    (q.abs(), x)
}

/// Multistart maximization of the quotient over the product of unit spheres.
///
/// Restart `r` draws its start from a ChaCha stream keyed by `(seed, r)`, so
/// the result depends only on the inputs, never on thread scheduling. The
/// first maximal restart wins ties.
pub fn oracle_norm(
    f: &SparseTensor,
    p: &PVector,
    restarts: usize,
    seed: u64,
) -> Result<SingularPair> {
    oracle_norm_with(f, p, restarts, seed, Execution::default())
}

pub fn oracle_norm_with(
    f: &SparseTensor,
    p: &PVector,
    restarts: usize,
    seed: u64,
    exec: Execution,
) -> Result<SingularPair> {
    if p.len() != f.order() {
        return Err(Error::ShapeMismatch(format!(
            "{} exponents for order {}",
            p.len(),
            f.order()
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument(
            "at least one restart is needed".into(),
        ));
    }
    let total: usize = f.dims().iter().sum();
    if total > DIMENSION_GUARD {
        return Err(Error::DimensionGuard(total, DIMENSION_GUARD));
    }
    if f.is_zero() {
        return Err(Error::ZeroTensor);
    }
    let dense = Dense::from_sparse(f);
    let positive = f.is_nonnegative();
    let runs = map_indexed(exec, restarts, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let start: Vec<Vec<f64>> = f
            .dims()
            .iter()
            .map(|&d| {
                (0..d)
                    .map(|_| {
                        if positive {
                            rng.gen_range(0.05..1.0)
                        } else {
                            rng.gen_range(-1.0..1.0)
                        }
                    })
                    .collect()
            })
            .collect();
        ascend(&dense, p.as_slice(), start)
    });
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.0 > runs[best].0 {
            best = r;
        }
    }
    let (lambda, x) = runs.into_iter().nth(best).expect("at least one restart");
    Ok(SingularPair {
        lambda,
        vector: TupleVector::new(x),
    })
}

/// Largest singular value of a matrix, by power iteration on `A^T A` from
/// the all-ones start.
pub fn oracle_matrix_2norm(a: &SparseTensor) -> Result<f64> {
    if a.order() != 2 {
        return Err(Error::NotAMatrix(a.order()));
    }
    let (rows, cols) = (a.dims()[0], a.dims()[1]);
    let mut dense = vec![vec![0.0; cols]; rows];
    for (idx, v) in a.entries() {
        dense[idx[0]][idx[1]] = v;
    }
    let mut v = vec![1.0 / (cols as f64).sqrt(); cols];
    let mut rayleigh = 0.0;
    for _ in 0..100_000 {
        let av: Vec<f64> = dense
            .iter()
            .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let mut w = vec![0.0; cols];
        for (row, &s) in dense.iter().zip(&av) {
            for (wj, &aij) in w.iter_mut().zip(row) {
                *wj += aij * s;
            }
        }
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        let norm = w.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = w.into_iter().map(|t| t / norm).collect();
        let done = (next - rayleigh).abs() <= 1e-16 * next;
        rayleigh = next;
        if done {
            break;
        }
    }
    Ok(rayleigh.sqrt())
}
