//! Sparse nonnegative tensors in coordinate form and the multilinear
//! contractions used by every solver.
//!
//! Indices are 0-based in the library API. The text format and the CLI use
//! 1-based indices (see [`crate::io`]).

use crate::error::{Error, Result};

/// An order-`m` tensor stored as lexicographically sorted coordinate entries.
///
/// Zero values are never stored. Summation in every contraction follows the
/// sorted entry order, so results are bit-for-bit reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTensor {
    dims: Vec<usize>,
    /// Flattened index tuples, `order()` indices per entry.
    indices: Vec<usize>,
    values: Vec<f64>,
    nonnegative: bool,
}

impl SparseTensor {
    /// Builds a tensor from 0-based `(index, value)` pairs.
    ///
    /// Entries equal to zero are dropped after validation. Duplicate index
    /// tuples are rejected even when one of them is zero.
    pub fn new<I>(dims: Vec<usize>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        if dims.len() < 2 {
            return Err(Error::ShapeMismatch(format!(
                "tensor order must be at least 2, got {}",
                dims.len()
            )));
        }
        if let Some(k) = dims.iter().position(|&d| d == 0) {
            return Err(Error::ShapeMismatch(format!(
                "dimension of mode {k} is zero"
            )));
        }
        let m = dims.len();
        let mut list: Vec<(Vec<usize>, f64)> = Vec::new();
        for (idx, v) in entries {
            if idx.len() != m {
                return Err(Error::ShapeMismatch(format!(
                    "index {idx:?} has {} components, tensor order is {m}",
                    idx.len()
                )));
            }
            for (k, (&j, &d)) in idx.iter().zip(&dims).enumerate() {
                if j >= d {
                    return Err(Error::IndexOutOfRange {
                        mode: k,
                        index: j,
                        dim: d,
                    });
                }
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(idx));
            }
            list.push((idx, v));
        }
        list.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateIndex(w[0].0.clone()));
        }
        let mut indices = Vec::with_capacity(list.len() * m);
        let mut values = Vec::with_capacity(list.len());
        for (idx, v) in list.into_iter().filter(|e| e.1 != 0.0) {
            indices.extend_from_slice(&idx);
            values.push(v);
        }
        let nonnegative = values.iter().all(|&v| v >= 0.0);
        Ok(SparseTensor {
            dims,
            indices,
            values,
            nonnegative,
        })
    }

    /// Same as [`SparseTensor::new`] but with 1-based index tuples.
    pub fn from_one_based<I>(dims: Vec<usize>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut shifted = Vec::new();
        for (idx, v) in entries {
            if let Some(k) = idx.iter().position(|&j| j == 0) {
                return Err(Error::IndexOutOfRange {
                    mode: k,
                    index: 0,
                    dim: dims.get(k).copied().unwrap_or(0),
                });
            }
            shifted.push((idx.into_iter().map(|j| j - 1).collect(), v));
        }
        Self::new(dims, shifted)
    }

    /// Tensor with every cell equal to `value`.
    pub fn filled(dims: Vec<usize>, value: f64) -> Result<Self> {
        let cells = all_indices(&dims);
        Self::new(dims, cells.into_iter().map(|idx| (idx, value)))
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Sum of all dimensions, the length of a flattened tuple vector.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Stored entries in sorted order, with 0-based indices.
    pub fn entries(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        self.indices
            .chunks_exact(self.order())
            .zip(self.values.iter().copied())
    }

    /// Value at a 0-based index tuple (zero when not stored).
    pub fn get(&self, idx: &[usize]) -> f64 {
        let m = self.order();
        let (mut lo, mut hi) = (0usize, self.values.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.indices[mid * m..(mid + 1) * m].cmp(idx) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return self.values[mid],
            }
        }
        0.0
    }

    /// The entrywise absolute value `|f|`.
    pub fn abs(&self) -> SparseTensor {
        SparseTensor {
            dims: self.dims.clone(),
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
            nonnegative: true,
        }
    }

    fn check_part(&self, k: usize, part: &[f64]) -> Result<()> {
        if part.len() != self.dims[k] {
            return Err(Error::ShapeMismatch(format!(
                "part for mode {k} has length {}, expected {}",
                part.len(),
                self.dims[k]
            )));
        }
        Ok(())
    }

    fn check_full(&self, x: &TupleVector) -> Result<()> {
        if x.order() != self.order() {
            return Err(Error::ShapeMismatch(format!(
                "vector has {} parts, tensor order is {}",
                x.order(),
                self.order()
            )));
        }
        for (k, part) in x.parts().iter().enumerate() {
            self.check_part(k, part)?;
        }
        Ok(())
    }

    fn check_reduced(&self, x: &ReducedTupleVector) -> Result<()> {
        if x.order() != self.order() {
            return Err(Error::ShapeMismatch(format!(
                "reduced vector belongs to order {}, tensor order is {}",
                x.order(),
                self.order()
            )));
        }
        for k in x.modes() {
            self.check_part(k, x.part(k))?;
        }
        Ok(())
    }

    /// The multilinear form `f(x_1, ..., x_m)`.
    pub fn evaluate(&self, x: &TupleVector) -> Result<f64> {
        self.check_full(x)?;
        let parts = x.parts();
        let mut acc = 0.0;
        for (idx, v) in self.entries() {
            let mut prod = v;
            for (k, &j) in idx.iter().enumerate() {
                prod *= parts[k][j];
            }
            acc += prod;
        }
        Ok(acc)
    }

    /// Contraction over all modes but `mode`; `slots[mode]` is never read.
    fn grad_slots(&self, mode: usize, slots: &[&[f64]]) -> Vec<f64> {
        let mut out = vec![0.0; self.dims[mode]];
        for (idx, v) in self.entries() {
            let mut prod = v;
            for (k, &j) in idx.iter().enumerate() {
                if k != mode {
                    prod *= slots[k][j];
                }
            }
            out[idx[mode]] += prod;
        }
        out
    }

    /// Gradient of the multilinear form in `mode`; the mode's own part of `x`
    /// does not enter the result.
    pub fn grad_mode(&self, mode: usize, x: &TupleVector) -> Result<Vec<f64>> {
        self.check_mode(mode)?;
        self.check_full(x)?;
        let slots: Vec<&[f64]> = x.parts().iter().map(Vec::as_slice).collect();
        Ok(self.grad_slots(mode, &slots))
    }

    /// Gradient in the omitted mode of a reduced vector.
    pub fn grad_mode_reduced(&self, x: &ReducedTupleVector) -> Result<Vec<f64>> {
        self.check_reduced(x)?;
        Ok(self.grad_slots(x.omitted_mode(), &x.slots(&[])))
    }

    /// Gradient in mode `k` with the omitted slot of `x` filled by `y`.
    pub fn grad_mode_substituted(
        &self,
        k: usize,
        x: &ReducedTupleVector,
        y: &[f64],
    ) -> Result<Vec<f64>> {
        self.check_mode(k)?;
        if k == x.omitted_mode() {
            return Err(Error::ShapeMismatch(format!(
                "mode {k} is the substituted mode"
            )));
        }
        self.check_reduced(x)?;
        self.check_part(x.omitted_mode(), y)?;
        Ok(self.grad_slots(k, &x.slots(y)))
    }

    /// Gradients in every mode except the omitted one, with the omitted slot
    /// filled by `y`. One pass over the entries; shapes are trusted.
    pub(crate) fn grad_all_substituted(&self, x: &ReducedTupleVector, y: &[f64]) -> Vec<Vec<f64>> {
        let m = self.order();
        let i = x.omitted_mode();
        let slots = x.slots(y);
        let mut out: Vec<Vec<f64>> = (0..m)
            .filter(|&k| k != i)
            .map(|k| vec![0.0; self.dims[k]])
            .collect();
        let mut prefix = vec![1.0; m + 1];
        let mut suffix = vec![1.0; m + 1];
        for (idx, v) in self.entries() {
            for k in 0..m {
                prefix[k + 1] = prefix[k] * slots[k][idx[k]];
            }
            for k in (0..m).rev() {
                suffix[k] = suffix[k + 1] * slots[k][idx[k]];
            }
            for k in 0..m {
                if k == i {
                    continue;
                }
                let slot = if k < i { k } else { k - 1 };
                out[slot][idx[k]] += v * (prefix[k] * suffix[k + 1]);
            }
        }
        out
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.order() {
            return Err(Error::ShapeMismatch(format!(
                "mode {mode} out of range for order {}",
                self.order()
            )));
        }
        Ok(())
    }
}

/// Every 0-based index tuple of a dense tensor with the given dims, in
/// lexicographic order.
pub fn all_indices(dims: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..total {
        out.push(idx.clone());
        for k in (0..dims.len()).rev() {
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// A tuple `(x_1, ..., x_m)` of per-mode vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleVector {
    parts: Vec<Vec<f64>>,
}

impl TupleVector {
    pub fn new(parts: Vec<Vec<f64>>) -> Self {
        TupleVector { parts }
    }

    /// The all-ones tuple for the given dims.
    pub fn ones(dims: &[usize]) -> Self {
        TupleVector {
            parts: dims.iter().map(|&d| vec![1.0; d]).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Vec<f64>] {
        &self.parts
    }

    pub fn part(&self, k: usize) -> &[f64] {
        &self.parts[k]
    }

    pub fn into_parts(self) -> Vec<Vec<f64>> {
        self.parts
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(Vec::len).collect()
    }

    /// Drops mode `i`, the restriction used by the reduced problem.
    pub fn drop_mode(&self, i: usize) -> ReducedTupleVector {
        let parts = self
            .parts
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, p)| p.clone())
            .collect();
        ReducedTupleVector {
            omitted: i,
            order: self.order(),
            parts,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.parts.iter().flatten().all(|&v| v > 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.parts.iter().flatten().all(|&v| v >= 0.0)
    }

    /// Concatenation of all parts in mode order.
    pub fn flatten(&self) -> Vec<f64> {
        self.parts.iter().flatten().copied().collect()
    }
}

/// A tuple with mode `omitted` left out, living in `R^{d - d_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTupleVector {
    omitted: usize,
    order: usize,
    parts: Vec<Vec<f64>>,
}

impl ReducedTupleVector {
    /// `parts` holds the `m - 1` remaining parts in increasing mode order.
    pub fn new(omitted: usize, parts: Vec<Vec<f64>>) -> Result<Self> {
        let order = parts.len() + 1;
        if omitted >= order {
            return Err(Error::ShapeMismatch(format!(
                "omitted mode {omitted} out of range for order {order}"
            )));
        }
        Ok(ReducedTupleVector {
            omitted,
            order,
            parts,
        })
    }

    pub fn omitted_mode(&self) -> usize {
        self.omitted
    }

    /// Order `m` of the full problem.
    pub fn order(&self) -> usize {
        self.order
    }

    /// The kept modes in increasing order.
    pub fn modes(&self) -> impl Iterator<Item = usize> + Clone {
        let i = self.omitted;
        (0..self.order).filter(move |&k| k != i)
    }

    /// Part for mode `k`; panics when `k` is the omitted mode.
    pub fn part(&self, k: usize) -> &[f64] {
        assert_ne!(k, self.omitted, "mode {k} is omitted");
        &self.parts[self.slot(k)]
    }

    pub fn parts(&self) -> &[Vec<f64>] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<Vec<f64>> {
        self.parts
    }

    fn slot(&self, k: usize) -> usize {
        if k < self.omitted {
            k
        } else {
            k - 1
        }
    }

    /// Full slot list with `fill` placed in the omitted position.
    pub(crate) fn slots<'a>(&'a self, fill: &'a [f64]) -> Vec<&'a [f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(self.order);
        let mut it = self.parts.iter();
        for k in 0..self.order {
            if k == self.omitted {
                out.push(fill);
            } else {
                out.push(it.next().expect("part count"));
            }
        }
        out
    }

    /// Inserts `x_i` in the omitted slot.
    pub fn insert(&self, x_i: Vec<f64>) -> TupleVector {
        let mut parts = self.parts.clone();
        parts.insert(self.omitted, x_i);
        TupleVector { parts }
    }

    pub fn is_positive(&self) -> bool {
        self.parts.iter().flatten().all(|&v| v > 0.0)
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.parts.iter().flatten().copied().collect()
    }

    /// Euclidean distance between the flattened tuples.
    pub fn l2_distance(&self, other: &ReducedTupleVector) -> f64 {
        self.parts
            .iter()
            .flatten()
            .zip(other.parts.iter().flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}
