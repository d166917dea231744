//! Structural classification of nonnegative tensors: the support graph,
//! weak irreducibility, irreducibility, and which modes can be eliminated
//! by the power method for a given exponent vector.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{sigma, PVector};
use crate::tensor::{SparseTensor, TupleVector};

/// A vertex `(mode, index)` of the support graph, both 0-based.
pub type Vertex = (usize, usize);

/// The undirected `m`-partite support graph of a nonnegative tensor.
///
/// Two vertices from different modes are adjacent when some positive entry
/// carries both indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGraph {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl ModeGraph {
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    fn id(&self, v: Vertex) -> usize {
        self.offsets[v.0] + v.1
    }

    fn vertex(&self, id: usize) -> Vertex {
        let mode = self
            .offsets
            .iter()
            .rposition(|&o| o <= id)
            .expect("offset table");
        (mode, id - self.offsets[mode])
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.adjacency[self.id(a)].contains(&self.id(b))
    }

    /// Neighbours of `v` in increasing (mode, index) order.
    pub fn neighbors(&self, v: Vertex) -> Vec<Vertex> {
        self.adjacency[self.id(v)]
            .iter()
            .map(|&w| self.vertex(w))
            .collect()
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp.into_iter().map(|id| self.vertex(id)).collect());
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
}

fn require_nonnegative(f: &SparseTensor) -> Result<()> {
    if f.is_nonnegative() {
        Ok(())
    } else {
        Err(Error::NegativeEntry)
    }
}

pub fn build_graph(f: &SparseTensor) -> Result<ModeGraph> {
    require_nonnegative(f)?;
    let dims = f.dims().to_vec();
    let mut offsets = Vec::with_capacity(dims.len());
    let mut total = 0;
    for &d in &dims {
        offsets.push(total);
        total += d;
    }
    let mut adjacency = vec![BTreeSet::new(); total];
    for (idx, _) in f.entries() {
        for k in 0..idx.len() {
            for l in (k + 1)..idx.len() {
                let a = offsets[k] + idx[k];
                let b = offsets[l] + idx[l];
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
    }
    Ok(ModeGraph {
        dims,
        offsets,
        adjacency,
    })
}

/// Connectivity of the support graph.
pub fn is_weakly_irreducible(f: &SparseTensor) -> Result<bool> {
    Ok(build_graph(f)?.is_connected())
}

/// One step of the boolean support map: vertex `(k, j)` becomes active when
/// some positive entry with `j_k = j` has all its other indices active.
fn propagate_support(f: &SparseTensor, active: &mut [Vec<bool>]) -> bool {
    let mut grew = Vec::new();
    for (idx, _) in f.entries() {
        let missing: Vec<usize> = (0..idx.len()).filter(|&k| !active[k][idx[k]]).collect();
        if let [k] = missing[..] {
            grew.push((k, idx[k]));
        }
    }
    let mut changed = false;
    for (k, j) in grew {
        if !active[k][j] {
            active[k][j] = true;
            changed = true;
        }
    }
    changed
}

/// Irreducibility by exact support propagation.
///
/// For every support holding exactly one vertex per mode, the boolean image
/// of `z -> alpha_0 z + (alpha_k sigma_k(z))_k` is iterated to a fixed point;
/// the tensor is irreducible iff every such start reaches full support.
/// Larger starting supports need not be checked because the support map is
/// monotone.
pub fn is_irreducible(f: &SparseTensor) -> Result<bool> {
    require_nonnegative(f)?;
    let dims = f.dims();
    let mut start = vec![0usize; dims.len()];
    loop {
        let mut active: Vec<Vec<bool>> = dims.iter().map(|&d| vec![false; d]).collect();
        for (k, &j) in start.iter().enumerate() {
            active[k][j] = true;
        }
        while propagate_support(f, &mut active) {}
        if active.iter().flatten().any(|a| !a) {
            return Ok(false);
        }
        let mut k = dims.len();
        loop {
            if k == 0 {
                return Ok(true);
            }
            k -= 1;
            start[k] += 1;
            if start[k] < dims[k] {
                break;
            }
            start[k] = 0;
        }
    }
}

/// `alpha_0 z + (alpha_1 sigma_1(z), ..., alpha_m sigma_m(z))`.
pub fn t_alpha_step(
    f: &SparseTensor,
    p: &PVector,
    alpha: &[f64],
    z: &TupleVector,
) -> Result<TupleVector> {
    if alpha.len() != f.order() + 1 {
        return Err(Error::ShapeMismatch(format!(
            "alpha needs {} weights, got {}",
            f.order() + 1,
            alpha.len()
        )));
    }
    if let Some(&a) = alpha.iter().find(|&&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "alpha weights must be positive, got {a}"
        )));
    }
    let parts = (0..f.order())
        .map(|k| {
            let s = sigma(f, p, k, z)?;
            Ok(z.part(k)
                .iter()
                .zip(s)
                .map(|(zv, sv)| alpha[0] * zv + alpha[k + 1] * sv)
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(TupleVector::new(parts))
}

/// `(m - 1) p'_i <= p_k` for all `k != i`, tested in the multiplied-out form
/// `(m - 1) p_i <= p_k (p_i - 1)` so that `p_i = m` sits exactly on the
/// boundary.
fn mode_admissible(p: &PVector, i: usize) -> bool {
    let m1 = (p.len() - 1) as f64;
    let pi = p.get(i);
    (0..p.len())
        .filter(|&k| k != i)
        .all(|k| m1 * pi <= p.get(k) * (pi - 1.0))
}

fn slack(p: &PVector, i: usize) -> f64 {
    let m1 = (p.len() - 1) as f64;
    let min_other = (0..p.len())
        .filter(|&k| k != i)
        .map(|k| p.get(k))
        .fold(f64::INFINITY, f64::min);
    (p.get(i) - 1.0) * (min_other - m1) - m1
}

/// Modes that may be eliminated by the power method, 0-based.
///
/// For matrices the mode with the smaller exponent is listed first; otherwise
/// the order is increasing.
pub fn admissible_indices(p: &PVector) -> Vec<usize> {
    let mut out: Vec<usize> = (0..p.len()).filter(|&i| mode_admissible(p, i)).collect();
    if p.len() == 2 {
        out.sort_by(|&a, &b| p.get(a).total_cmp(&p.get(b)).then(a.cmp(&b)));
    }
    out
}

/// Preferred mode to eliminate: for matrices the one with the smaller
/// exponent, otherwise the admissible mode with the largest slack in the
/// exponent condition (ties to the smallest mode).
pub fn choose_index(p: &PVector) -> Option<usize> {
    let adm = admissible_indices(p);
    if p.len() == 2 {
        return adm.first().copied();
    }
    let mut best: Option<(usize, f64)> = None;
    for i in adm {
        let s = slack(p, i);
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// Everything the CLI reports about a tensor/exponent combination.
/// Mode numbers are 1-based here because the report is user-facing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub weakly_irreducible: bool,
    pub irreducible: bool,
    pub admissible_indices: Vec<usize>,
    pub chosen_index: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl StructureReport {
    pub fn analyze(f: &SparseTensor, p: &PVector) -> Result<Self> {
        p.check_order(f)?;
        let weakly_irreducible = is_weakly_irreducible(f)?;
        let irreducible = is_irreducible(f)?;
        let mut notes = Vec::new();
        if f.is_zero() {
            notes.push("tensor is zero".to_string());
        }
        Ok(StructureReport {
            weakly_irreducible,
            irreducible,
            admissible_indices: admissible_indices(p).into_iter().map(|i| i + 1).collect(),
            chosen_index: choose_index(p).map(|i| i + 1),
            notes,
        })
    }

    pub fn solvable(&self) -> bool {
        self.weakly_irreducible && self.chosen_index.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor(dims: Vec<usize>, ones: &[[usize; 3]]) -> SparseTensor {
        SparseTensor::from_one_based(dims, ones.iter().map(|i| (i.to_vec(), 1.0))).unwrap()
    }

    #[test]
    fn diagonal_tensor_has_two_triangles() {
        let f = tensor(vec![2, 2, 2], &[[1, 1, 1], [2, 2, 2]]);
        let g = build_graph(&f).unwrap();
        assert_eq!(g.edge_count(), 6);
        let comps = g.components();
        assert_eq!(
            comps,
            vec![vec![(0, 0), (1, 0), (2, 0)], vec![(0, 1), (1, 1), (2, 1)]]
        );
        assert!(!is_weakly_irreducible(&f).unwrap());
        assert!(!is_irreducible(&f).unwrap());
    }

    #[test]
    fn counterexample_tensor_is_connected_but_reducible() {
        let f = tensor(vec![2, 2, 2], &[[1, 1, 1], [1, 2, 1], [2, 2, 2]]);
        let g = build_graph(&f).unwrap();
        assert_eq!(g.vertex_count(), 6);
        assert!(g.is_connected());
        assert!(g.has_edge((0, 0), (1, 1)));
        assert!(!g.has_edge((0, 1), (1, 0)));
        assert!(!is_irreducible(&f).unwrap());
    }

    #[test]
    fn all_ones_is_complete_and_irreducible() {
        let f = SparseTensor::filled(vec![2, 3, 2], 1.0).unwrap();
        let g = build_graph(&f).unwrap();
        assert_eq!(g.edge_count(), 2 * 3 + 2 * 2 + 3 * 2);
        assert!(is_irreducible(&f).unwrap());
    }

    #[test]
    fn negative_entries_are_rejected() {
        let f = SparseTensor::new(vec![2, 2], vec![(vec![0, 0], -1.0)]).unwrap();
        assert_eq!(build_graph(&f), Err(Error::NegativeEntry));
        assert_eq!(is_irreducible(&f), Err(Error::NegativeEntry));
    }

    #[test]
    fn admissibility_examples() {
        assert_eq!(
            admissible_indices(&PVector::uniform(3, 3.0).unwrap()),
            vec![0, 1, 2]
        );
        assert!(admissible_indices(&PVector::uniform(3, 2.0).unwrap()).is_empty());
        assert_eq!(
            admissible_indices(&PVector::uniform(4, 4.0).unwrap()),
            vec![0, 1, 2, 3]
        );
        let p = PVector::new(vec![1.5, 4.0]).unwrap();
        assert_eq!(admissible_indices(&p), vec![0, 1]);
        assert_eq!(choose_index(&p), Some(0));
        let p = PVector::new(vec![4.0, 1.5]).unwrap();
        assert_eq!(admissible_indices(&p), vec![1, 0]);
        assert_eq!(choose_index(&p), Some(1));
    }

    #[test]
    fn chosen_index_maximizes_slack() {
        // slack: mode 0 -> 4*(3-2)-2 = 2, mode 1 -> 2*(3-2)-2 = 0
        let p = PVector::new(vec![5.0, 3.0, 3.0]).unwrap();
        assert_eq!(admissible_indices(&p), vec![0, 1, 2]);
        assert_eq!(choose_index(&p), Some(0));
        assert_eq!(choose_index(&PVector::uniform(3, 3.0).unwrap()), Some(0));
        assert_eq!(choose_index(&PVector::uniform(3, 2.5).unwrap()), None);
    }

    #[test]
    fn t_alpha_dominates_scaled_input() {
        let f = SparseTensor::filled(vec![2, 2, 2], 1.0).unwrap();
        let p = PVector::uniform(3, 3.0).unwrap();
        let z = TupleVector::new(vec![vec![1.0, 0.0], vec![0.6, 0.8], vec![0.0, 1.0]]);
        let alpha = [0.5, 1.0, 2.0, 0.25];
        let t = t_alpha_step(&f, &p, &alpha, &z).unwrap();
        assert!(t.is_positive());
        for (tp, zp) in t.parts().iter().zip(z.parts()) {
            for (a, b) in tp.iter().zip(zp) {
                assert!(*a >= alpha[0] * b);
            }
        }
    }

    #[test]
    fn t_alpha_of_zero_tensor_is_identity() {
        let f = SparseTensor::new(vec![2, 3], Vec::new()).unwrap();
        let p = PVector::uniform(2, 2.0).unwrap();
        let z = TupleVector::new(vec![vec![0.2, 0.8], vec![1.0, 0.0, 0.5]]);
        assert_eq!(t_alpha_step(&f, &p, &[1.0, 1.0, 1.0], &z).unwrap(), z);
        assert!(t_alpha_step(&f, &p, &[1.0, 0.0, 1.0], &z).is_err());
    }

    #[test]
    fn report_uses_one_based_modes() {
        let f = SparseTensor::filled(vec![2, 2, 2], 1.0).unwrap();
        let r = StructureReport::analyze(&f, &PVector::uniform(3, 3.0).unwrap()).unwrap();
        assert_eq!(r.admissible_indices, vec![1, 2, 3]);
        assert_eq!(r.chosen_index, Some(1));
        assert!(r.solvable());
    }
}
