//! Baseline power method for equal exponents.
//!
//! Iterates `w = (sigma_1(v), ..., sigma_m(v))`, `v = w / (n^T w)` on the
//! whole tuple at once. There are no certified bounds, so results carry no
//! bracket and stopping is on the distance between successive iterates.

use crate::error::{Error, Result};
use crate::hgpm::{IterationRecord, Method, SolveResult, SolveStatus};
use crate::spectral::{normalize, quotient_q, sigma, PVector, SingularPair};
use crate::structure::is_weakly_irreducible;
use crate::tensor::{SparseTensor, TupleVector};

const NOTE: &str = "power method: no certified bracket, stopped on iterate distance";

#[derive(Debug, Clone, PartialEq)]
pub struct PmConfig {
    /// Stop once successive iterates are closer than this in the l2 norm.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Positive normalizer `n`; all ones when absent.
    pub normalizer: Option<TupleVector>,
    /// Positive start; `ones / sum(d)` when absent.
    pub start: Option<TupleVector>,
}

impl Default for PmConfig {
    fn default() -> Self {
        PmConfig {
            epsilon: 1e-10,
            max_iter: 10_000,
            normalizer: None,
            start: None,
        }
    }
}

fn check_positive(f: &SparseTensor, v: &TupleVector, what: &str) -> Result<()> {
    if v.dims() != f.dims() {
        return Err(Error::ShapeMismatch(format!(
            "{what} does not match the tensor dimensions"
        )));
    }
    if let Some(k) = v
        .parts()
        .iter()
        .position(|part| !part.iter().all(|&x| x > 0.0 && x.is_finite()))
    {
        return Err(Error::NonPositiveComponent(k));
    }
    Ok(())
}

fn p_normalized(p: &PVector, v: &TupleVector) -> Result<TupleVector> {
    v.parts()
        .iter()
        .enumerate()
        .map(|(k, part)| normalize(part, p.get(k)).ok_or(Error::ZeroPart(k)))
        .collect::<Result<Vec<_>>>()
        .map(TupleVector::new)
}

pub fn solve_pm(f: &SparseTensor, p: f64, config: &PmConfig) -> Result<SolveResult> {
    let pv = PVector::uniform(f.order(), p)?;
    if !(config.epsilon > 0.0) || config.max_iter == 0 {
        return Err(Error::InvalidArgument(
            "epsilon must be positive and max_iter at least 1".into(),
        ));
    }
    if f.is_zero() {
        return Err(Error::ZeroTensor);
    }
    if !f.is_nonnegative() {
        return Err(Error::NegativeEntry);
    }
    if !is_weakly_irreducible(f)? {
        return Err(Error::NotWeaklyIrreducible);
    }
    let ones = TupleVector::ones(f.dims());
    let n = config.normalizer.clone().unwrap_or_else(|| ones.clone());
    check_positive(f, &n, "normalizer")?;
    let mut v = match &config.start {
        Some(s) => {
            check_positive(f, s, "start vector")?;
            s.clone()
        }
        None => {
            let total = f.total_dim() as f64;
            TupleVector::new(
                ones.parts()
                    .iter()
                    .map(|part| vec![1.0 / total; part.len()])
                    .collect(),
            )
        }
    };
    let nw = n.flatten();

    let mut trace = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut note = NOTE.to_string();
    let mut iterations = 0;
    for k in 1..=config.max_iter {
        let w = TupleVector::new(
            (0..f.order())
                .map(|i| sigma(f, &pv, i, &v))
                .collect::<Result<Vec<_>>>()?,
        );
        let scale: f64 = nw.iter().zip(w.flatten()).map(|(a, b)| a * b).sum();
        if !(scale > 0.0 && scale.is_finite()) {
            status = SolveStatus::NumericalBreakdown;
            note = format!("{NOTE}; normalizer product is {scale}");
            break;
        }
        let next = TupleVector::new(
            w.parts()
                .iter()
                .map(|part| part.iter().map(|x| x / scale).collect())
                .collect(),
        );
        let step = crate::spectral::l2_distance(&next.flatten(), &v.flatten());
        v = next;
        iterations = k;
        let estimate = match p_normalized(&pv, &v).and_then(|u| quotient_q(f, &pv, &u)) {
            Ok(q) => q,
            Err(e) => {
                status = SolveStatus::NumericalBreakdown;
                note = format!("{NOTE}; {e}");
                break;
            }
        };
        trace.push(IterationRecord {
            k,
            bracket: None,
            estimate,
            x: None,
        });
        if step < config.epsilon {
            status = SolveStatus::Converged;
            break;
        }
    }

    let u = p_normalized(&pv, &v)?;
    let lambda = quotient_q(f, &pv, &u)?;
    Ok(SolveResult {
        method: Method::Pm,
        lambda,
        bracket: None,
        vector: SingularPair { lambda, vector: u },
        reduced: None,
        trace,
        iterations,
        status,
        q_value: lambda,
        note: Some(note),
    })
}
