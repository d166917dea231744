//! Eigenproblems of partially symmetric tensors as singular problems.
//!
//! Modes are grouped into consecutive blocks of sizes `q_1, ..., q_k`. If the
//! tensor is invariant under index permutations inside each block, the
//! maximal positive solution of
//! `grad_{first mode of block j} f(xi(y)) = lambda psi_{p_j}(y_j)` is obtained
//! by solving the singular problem for the lifted exponents and reading off
//! one part per block.

use crate::error::{Error, Result};
use crate::hgpm::{solve_hgpm_observed, SolveResult, SolverConfig};
use crate::spectral::{psi, PVector};
use crate::structure::admissible_indices;
use crate::tensor::{SparseTensor, TupleVector};

/// Tolerance of the per-iteration block-constancy check.
pub const BLOCK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryStructure {
    block_sizes: Vec<usize>,
    block_dims: Vec<usize>,
    block_exponents: Vec<f64>,
}

impl SymmetryStructure {
    pub fn new(
        block_sizes: Vec<usize>,
        block_dims: Vec<usize>,
        block_exponents: Vec<f64>,
    ) -> Result<Self> {
        if block_sizes.is_empty() || block_sizes.contains(&0) {
            return Err(Error::InconsistentStructure(
                "block sizes must be positive".into(),
            ));
        }
        if block_dims.len() != block_sizes.len() || block_exponents.len() != block_sizes.len() {
            return Err(Error::InconsistentStructure(
                "one dimension and one exponent per block".into(),
            ));
        }
        if block_dims.contains(&0) {
            return Err(Error::InconsistentStructure(
                "block dimensions must be positive".into(),
            ));
        }
        PVector::new(block_exponents.clone())?;
        Ok(SymmetryStructure {
            block_sizes,
            block_dims,
            block_exponents,
        })
    }

    /// Reads the block dimensions off `f`, which must be constant within
    /// every block.
    pub fn for_tensor(
        f: &SparseTensor,
        block_sizes: Vec<usize>,
        block_exponents: Vec<f64>,
    ) -> Result<Self> {
        if block_sizes.iter().sum::<usize>() != f.order() {
            return Err(Error::InconsistentStructure(format!(
                "block sizes sum to {}, tensor has order {}",
                block_sizes.iter().sum::<usize>(),
                f.order()
            )));
        }
        let mut block_dims = Vec::new();
        let mut start = 0;
        for &q in &block_sizes {
            if q == 0 {
                return Err(Error::InconsistentStructure(
                    "block sizes must be positive".into(),
                ));
            }
            let dims = &f.dims()[start..start + q];
            if dims.iter().any(|&d| d != dims[0]) {
                return Err(Error::InconsistentStructure(format!(
                    "dimensions differ inside the block at mode {}",
                    start + 1
                )));
            }
            block_dims.push(dims[0]);
            start += q;
        }
        Self::new(block_sizes, block_dims, block_exponents)
    }

    pub fn blocks(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn block_exponents(&self) -> &[f64] {
        &self.block_exponents
    }

    pub fn order(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// First mode of every block.
    pub fn block_starts(&self) -> Vec<usize> {
        let mut starts = Vec::with_capacity(self.blocks());
        let mut s = 0;
        for &q in &self.block_sizes {
            starts.push(s);
            s += q;
        }
        starts
    }

    /// Block of every mode.
    pub fn block_of_mode(&self) -> Vec<usize> {
        self.block_sizes
            .iter()
            .enumerate()
            .flat_map(|(j, &q)| std::iter::repeat_n(j, q))
            .collect()
    }

    pub fn lifted_dims(&self) -> Vec<usize> {
        self.block_of_mode()
            .into_iter()
            .map(|j| self.block_dims[j])
            .collect()
    }

    pub fn lifted_exponents(&self) -> PVector {
        PVector::new(
            self.block_of_mode()
                .into_iter()
                .map(|j| self.block_exponents[j])
                .collect(),
        )
        .expect("block exponents validated")
    }

    fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if dims != self.lifted_dims().as_slice() {
            return Err(Error::InconsistentStructure(format!(
                "tensor dimensions {:?} do not match the structure {:?}",
                dims,
                self.lifted_dims()
            )));
        }
        Ok(())
    }
}

/// Whether every stored entry is unchanged by swapping two neighbouring
/// indices inside a block. Neighbour swaps generate each block's symmetric
/// group, and an entry that is zero while its image is not is caught from the
/// stored image, so this covers all permutations. Values are compared exactly.
pub fn check_partial_symmetry(f: &SparseTensor, s: &SymmetryStructure) -> Result<bool> {
    s.check_dims(f.dims())?;
    let blocks = s.block_of_mode();
    let mut swapped = Vec::with_capacity(f.order());
    for (idx, v) in f.entries() {
        for k in 0..f.order().saturating_sub(1) {
            if blocks[k] != blocks[k + 1] || idx[k] == idx[k + 1] {
                continue;
            }
            swapped.clear();
            swapped.extend_from_slice(idx);
            swapped.swap(k, k + 1);
            if f.get(&swapped) != v {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `xi(y)`: block vector `y_j` repeated `q_j` times.
pub fn lift_xi(s: &SymmetryStructure, y: &[Vec<f64>]) -> Result<TupleVector> {
    if y.len() != s.blocks() {
        return Err(Error::ShapeMismatch(format!(
            "{} block vectors for {} blocks",
            y.len(),
            s.blocks()
        )));
    }
    let mut parts = Vec::with_capacity(s.order());
    for (j, v) in y.iter().enumerate() {
        if v.len() != s.block_dims[j] {
            return Err(Error::ShapeMismatch(format!(
                "block {} vector has length {}",
                j + 1,
                v.len()
            )));
        }
        parts.extend(std::iter::repeat_n(v.clone(), s.block_sizes[j]));
    }
    Ok(TupleVector::new(parts))
}

/// `zeta(z)`: the first part of every block.
pub fn project_zeta(s: &SymmetryStructure, z: &TupleVector) -> Result<Vec<Vec<f64>>> {
    s.check_dims(&z.dims())?;
    Ok(s.block_starts()
        .into_iter()
        .map(|k| z.part(k).to_vec())
        .collect())
}

/// Solution of the block eigenproblem in block coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda: f64,
    /// One unit vector per block.
    pub vectors: Vec<Vec<f64>>,
    /// Per-block residuals of the eigen system.
    pub residuals: Vec<f64>,
    /// The lifted singular solve.
    pub solve: SolveResult,
    pub notes: Vec<String>,
}

/// `||grad_{first mode of block j} f(xi(y)) - lambda psi_{p_j}(y_j)||_2` per block.
pub fn eigen_residual(
    f: &SparseTensor,
    s: &SymmetryStructure,
    lambda: f64,
    y: &[Vec<f64>],
) -> Result<Vec<f64>> {
    s.check_dims(f.dims())?;
    let x = lift_xi(s, y)?;
    s.block_starts()
        .into_iter()
        .enumerate()
        .map(|(j, k)| {
            let g = f.grad_mode(k, &x)?;
            let target = psi(s.block_exponents[j], &y[j]);
            Ok(g.iter()
                .zip(&target)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt())
        })
        .collect()
}

fn rectangular_notes(s: &SymmetryStructure) -> Vec<String> {
    let m = s.order();
    if s.blocks() != 2 || m < 3 {
        return Vec::new();
    }
    let (q1, p) = (s.block_sizes[0], s.block_exponents());
    if q1 == 1 || q1 == m - 1 {
        let (single, multi) = if q1 == 1 { (p[0], p[1]) } else { (p[1], p[0]) };
        vec![format!(
            "rectangular structure: single-mode exponent {single}, repeated-mode exponent {multi}; \
             admissibility is tested on the lifted exponents"
        )]
    } else {
        Vec::new()
    }
}

/// Solves the block eigenproblem through the lifted singular problem.
///
/// The lifted run starts block-constant and every iterate is checked to stay
/// block-constant within [`BLOCK_TOLERANCE`]; drift ends the run with a
/// numerical breakdown status.
pub fn solve_eigenproblem(
    f: &SparseTensor,
    s: &SymmetryStructure,
    config: &SolverConfig,
) -> Result<EigenResult> {
    if !check_partial_symmetry(f, s)? {
        return Err(Error::NotPartiallySymmetric);
    }
    let p = s.lifted_exponents();
    if admissible_indices(&p).is_empty() {
        return Err(Error::ConditionViolated);
    }
    let blocks = s.block_of_mode();
    let mut observe = |k: usize, x: &crate::tensor::ReducedTupleVector| {
        let mut first: Vec<Option<usize>> = vec![None; s.blocks()];
        for mode in x.modes() {
            let j = blocks[mode];
            match first[j] {
                None => first[j] = Some(mode),
                Some(lead) => {
                    let drift = x
                        .part(lead)
                        .iter()
                        .zip(x.part(mode))
                        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
                    if drift > BLOCK_TOLERANCE {
                        return Err(format!(
                            "iterate {k} left the block-constant set (drift {drift:e})"
                        ));
                    }
                }
            }
        }
        Ok(())
    };
    let solve = solve_hgpm_observed(f, &p, config, &mut observe)?;
    let vectors = project_zeta(s, &solve.vector.vector)?;
    let residuals = eigen_residual(f, s, solve.lambda, &vectors)?;
    Ok(EigenResult {
        lambda: solve.lambda,
        vectors,
        residuals,
        solve,
        notes: rectangular_notes(s),
    })
}
